#include "idapbc/dictionary.hpp"

#include <cmath>
#include <cstdio>

namespace idapbc {

namespace {

void append_terms_of_degree(int n_vars, int var, int remaining, std::vector<int>& current,
                            std::vector<std::vector<int>>& out) {
    if (var == n_vars - 1) {
        current[var] = remaining;
        out.push_back(current);
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        current[var] = e;
        append_terms_of_degree(n_vars, var + 1, remaining - e, current, out);
    }
}

}  // namespace

PolynomialLibrary PolynomialLibrary::make(int n_vars, int max_degree) {
    if (n_vars < 1 || n_vars > detail::kMaxLibraryVars || max_degree < 1 ||
        max_degree > detail::kMaxLibraryDegree) {
        throw std::invalid_argument("PolynomialLibrary: unsupported size");
    }
    PolynomialLibrary lib;
    lib.n_vars = n_vars;
    lib.max_degree = max_degree;
    std::vector<int> current(n_vars, 0);
    for (int deg = 0; deg <= max_degree; ++deg) {
        append_terms_of_degree(n_vars, 0, deg, current, lib.terms);
    }
    return lib;
}

Vec features(const PolynomialLibrary& lib, const Vec& x) {
    if (static_cast<int>(x.size()) != lib.n_vars) {
        throw std::invalid_argument("features: state dimension mismatch");
    }
    Vec out(lib.size());
    features_into(lib, x.data(), out.data());
    return out;
}

Mat feature_jacobian(const PolynomialLibrary& lib, const Vec& x) {
    if (static_cast<int>(x.size()) != lib.n_vars) {
        throw std::invalid_argument("feature_jacobian: state dimension mismatch");
    }
    std::vector<double> buffer(lib.size() * lib.n_vars);
    feature_jacobian_into(lib, x.data(), buffer.data());
    Mat jac(lib.size(), lib.n_vars);
    for (std::size_t j = 0; j < lib.size(); ++j) {
        for (int i = 0; i < lib.n_vars; ++i) {
            jac(j, i) = buffer[j * lib.n_vars + i];
        }
    }
    return jac;
}

Vec deterministic_gates(const SparseLinearModel& model) {
    model.validate();
    Vec gates(model.library.size());
    for (std::size_t j = 0; j < gates.size(); ++j) {
        gates[j] = hard_concrete_deterministic(model.log_alpha[j], model.constants);
    }
    return gates;
}

Vec sample_gates(const SparseLinearModel& model, const Vec& noise) {
    model.validate();
    if (noise.size() != model.library.size()) {
        throw std::invalid_argument("sample_gates: noise length mismatch");
    }
    Vec gates(model.library.size());
    for (std::size_t j = 0; j < gates.size(); ++j) {
        gates[j] = hard_concrete_sample(model.log_alpha[j], noise[j], model.constants);
    }
    return gates;
}

double l0_penalty(const SparseLinearModel& model) {
    model.validate();
    double total = 0.0;
    for (double la : model.log_alpha) {
        total += l0_term(la, model.constants);
    }
    return total;
}

double evaluate(const SparseLinearModel& model, const Vec& x, const Vec& gates) {
    if (gates.size() != model.library.size()) {
        throw std::invalid_argument("evaluate: gates length mismatch");
    }
    const Vec theta = features(model.library, x);
    double acc = 0.0;
    for (std::size_t j = 0; j < theta.size(); ++j) {
        acc += gates[j] * model.xi[j] * theta[j];
    }
    return acc;
}

Vec evaluate_gradient(const SparseLinearModel& model, const Vec& x, const Vec& gates) {
    if (gates.size() != model.library.size()) {
        throw std::invalid_argument("evaluate_gradient: gates length mismatch");
    }
    const Mat jac = feature_jacobian(model.library, x);
    Vec grad(model.library.n_vars, 0.0);
    for (std::size_t j = 0; j < model.library.size(); ++j) {
        const double w = gates[j] * model.xi[j];
        if (w == 0.0) {
            continue;
        }
        for (int i = 0; i < model.library.n_vars; ++i) {
            grad[i] += w * jac(j, i);
        }
    }
    return grad;
}

namespace {

std::string term_string(const std::vector<int>& exponents,
                        const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t v = 0; v < exponents.size(); ++v) {
        const int e = exponents[v];
        if (e == 0) {
            continue;
        }
        if (!out.empty()) {
            out += "*";
        }
        out += names[v];
        if (e > 1) {
            out += "^" + std::to_string(e);
        }
    }
    return out;
}

}  // namespace

std::string export_expression(const SparseLinearModel& model,
                              const std::vector<std::string>& variable_names) {
    model.validate();
    if (static_cast<int>(variable_names.size()) != model.library.n_vars) {
        throw std::invalid_argument("export_expression: need one name per variable");
    }
    const Vec gates = deterministic_gates(model);
    std::string out;
    char buffer[64];
    for (std::size_t j = 0; j < model.library.size(); ++j) {
        if (gates[j] < 0.5) {
            continue;
        }
        const double coeff = gates[j] * model.xi[j];
        std::snprintf(buffer, sizeof(buffer), "%.4f", std::abs(coeff));
        const bool negative = coeff < 0.0;
        if (out.empty()) {
            if (negative) {
                out += "-";
            }
        } else {
            out += negative ? " - " : " + ";
        }
        out += buffer;
        const std::string term = term_string(model.library.terms[j], variable_names);
        if (!term.empty()) {
            out += "*" + term;
        }
    }
    return out.empty() ? "0" : out;
}

int active_term_count(const SparseLinearModel& model) {
    const Vec gates = deterministic_gates(model);
    int count = 0;
    for (double g : gates) {
        if (g >= 0.5) {
            ++count;
        }
    }
    return count;
}

}  // namespace idapbc
