#include "idapbc/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <yaml-cpp/yaml.h>

namespace idapbc {

namespace {

std::string where(const std::string& source, const YAML::Mark& mark) {
    return source + ":" + std::to_string(mark.line + 1) + ":" + std::to_string(mark.column + 1);
}

bool contains(std::initializer_list<const char*> keys, const std::string& k) {
    for (const char* key : keys)
        if (k == key) return true;
    return false;
}

class Section {
public:
    Section(const YAML::Node& node, std::string label, const std::string& source)
        : node_(node), label_(std::move(label)), source_(source) {
        if (node_ && !node_.IsMap())
            throw ConfigError(where(source_, node_.Mark()) + ": " + label_ + " must be a mapping");
    }

    void allow(std::initializer_list<const char*> keys) const {
        if (!node_) return;
        for (const auto& kv : node_) {
            const std::string k = kv.first.as<std::string>();
            if (!contains(keys, k))
                throw ConfigError(where(source_, kv.first.Mark()) + ": unknown key '" + k +
                                  "' in " + label_);
        }
    }

    YAML::Node child(const char* key) const { return node_ ? node_[key] : YAML::Node(YAML::NodeType::Undefined); }

    Section section(const char* key) const {
        return Section(child(key), label_ == "the top level" ? std::string("'") + key + "'"
                                                             : label_ + "." + key,
                       source_);
    }

    template <class T>
    void read(const char* key, T& out) const {
        const YAML::Node n = child(key);
        if (!n) return;
        try {
            out = n.as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(where(source_, n.Mark()) + ": bad value for '" + std::string(key) +
                              "'");
        }
    }

    explicit operator bool() const { return static_cast<bool>(node_); }
    const YAML::Node& node() const { return node_; }
    const std::string& source() const { return source_; }

private:
    YAML::Node node_;
    std::string label_;
    const std::string& source_;
};

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source_name) {
    YAML::Node doc;
    try {
        doc = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(where(source_name, e.mark) + ": " + e.msg);
    }
    if (doc.IsNull() || !doc)
        doc = YAML::Node(YAML::NodeType::Map);

    RunConfig cfg;
    TrainConfig& t = cfg.train;

    const Section root(doc, "the top level", source_name);
    root.allow({"task", "seed", "epochs", "learning_rate", "lr_schedule", "adam", "horizon",
                "steps", "library", "initial_state", "learn_charge_for_regulation", "init",
                "plant", "regulation", "oscillation", "loss", "output_dir"});

    std::string task = task_kind_name(t.task);
    root.read("task", task);
    if (task == "regulation") {
        t.task = TaskKind::Regulation;
    } else if (task == "oscillation") {
        t.task = TaskKind::Oscillation;
    } else {
        throw ConfigError(source_name + ": task must be 'regulation' or 'oscillation', got '" +
                          task + "'");
    }

    std::string schedule = lr_schedule_name(t.lr_schedule);
    root.read("lr_schedule", schedule);
    if (schedule == "constant") {
        t.lr_schedule = LrSchedule::Constant;
    } else if (schedule == "cosine") {
        t.lr_schedule = LrSchedule::Cosine;
    } else {
        throw ConfigError(source_name + ": lr_schedule must be 'constant' or 'cosine', got '" +
                          schedule + "'");
    }

    root.read("seed", t.seed);
    root.read("epochs", t.epochs);
    root.read("learning_rate", t.learning_rate);
    root.read("horizon", t.horizon);
    root.read("steps", t.steps);
    root.read("learn_charge_for_regulation", t.learn_charge_for_regulation);
    root.read("output_dir", cfg.output_dir);

    const Section adam = root.section("adam");
    adam.allow({"beta1", "beta2", "eps"});
    adam.read("beta1", t.adam_beta1);
    adam.read("beta2", t.adam_beta2);
    adam.read("eps", t.adam_eps);

    const Section library = root.section("library");
    library.allow({"n_vars", "max_degree"});
    int n_vars = t.library.n_vars;
    int max_degree = t.library.max_degree;
    library.read("n_vars", n_vars);
    library.read("max_degree", max_degree);
    try {
        t.library = PolynomialLibrary::make(n_vars, max_degree);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(source_name + ": bad library settings: " + e.what());
    }

    const Section x0 = root.section("initial_state");
    x0.allow({"q", "p", "charge"});
    x0.read("q", t.q0);
    x0.read("p", t.p0);
    x0.read("charge", t.charge0);

    const Section init = root.section("init");
    init.allow({"log_alpha", "xi_scale"});
    init.read("log_alpha", t.init_log_alpha);
    init.read("xi_scale", t.init_xi_scale);

    const Section plant = root.section("plant");
    plant.allow(
        {"mass", "stiffness", "damping", "resistance", "area_permittivity", "rest_length"});
    plant.read("mass", t.plant.mass);
    plant.read("stiffness", t.plant.stiffness);
    plant.read("damping", t.plant.damping);
    plant.read("resistance", t.plant.resistance);
    plant.read("area_permittivity", t.plant.area_permittivity);
    plant.read("rest_length", t.plant.rest_length);

    const Section reg = root.section("regulation");
    reg.allow({"q_star", "gamma1", "alpha3"});
    reg.read("q_star", t.regulation.q_star);
    reg.read("gamma1", t.regulation.gamma1);
    reg.read("alpha3", t.regulation.alpha3);

    const Section osc = root.section("oscillation");
    osc.allow({"q_star", "alpha1", "alpha2", "alpha3", "alpha4", "lambda1", "lambda2", "gamma1",
               "gamma2", "gamma3"});
    osc.read("q_star", t.oscillation.q_star);
    osc.read("alpha1", t.oscillation.alpha1);
    osc.read("alpha2", t.oscillation.alpha2);
    osc.read("alpha3", t.oscillation.alpha3);
    osc.read("alpha4", t.oscillation.alpha4);
    osc.read("lambda1", t.oscillation.lambda1);
    osc.read("lambda2", t.oscillation.lambda2);
    osc.read("gamma1", t.oscillation.gamma1);
    osc.read("gamma2", t.oscillation.gamma2);
    osc.read("gamma3", t.oscillation.gamma3);

    const Section loss = root.section("loss");
    loss.allow({"lambda_mc", "gamma_sparse"});
    loss.read("lambda_mc", t.total.lambda_mc);
    loss.read("gamma_sparse", t.total.gamma_sparse);

    // The rollout horizon doubles as the oscillation period.
    t.oscillation.period = t.horizon;

    try {
        t.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(source_name + ": " + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

std::string config_to_yaml(const RunConfig& cfg) {
    const TrainConfig& t = cfg.train;
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "task" << YAML::Value << task_kind_name(t.task);
    out << YAML::Key << "seed" << YAML::Value << t.seed;
    out << YAML::Key << "epochs" << YAML::Value << t.epochs;
    out << YAML::Key << "learning_rate" << YAML::Value << t.learning_rate;
    out << YAML::Key << "lr_schedule" << YAML::Value << lr_schedule_name(t.lr_schedule);
    out << YAML::Key << "adam" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "beta1" << YAML::Value << t.adam_beta1;
    out << YAML::Key << "beta2" << YAML::Value << t.adam_beta2;
    out << YAML::Key << "eps" << YAML::Value << t.adam_eps;
    out << YAML::EndMap;
    out << YAML::Key << "horizon" << YAML::Value << t.horizon;
    out << YAML::Key << "steps" << YAML::Value << t.steps;
    out << YAML::Key << "library" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "n_vars" << YAML::Value << t.library.n_vars;
    out << YAML::Key << "max_degree" << YAML::Value << t.library.max_degree;
    out << YAML::EndMap;
    out << YAML::Key << "initial_state" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "q" << YAML::Value << t.q0;
    out << YAML::Key << "p" << YAML::Value << t.p0;
    out << YAML::Key << "charge" << YAML::Value << t.charge0;
    out << YAML::EndMap;
    out << YAML::Key << "learn_charge_for_regulation" << YAML::Value
        << t.learn_charge_for_regulation;
    out << YAML::Key << "init" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "log_alpha" << YAML::Value << t.init_log_alpha;
    out << YAML::Key << "xi_scale" << YAML::Value << t.init_xi_scale;
    out << YAML::EndMap;
    out << YAML::Key << "plant" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "mass" << YAML::Value << t.plant.mass;
    out << YAML::Key << "stiffness" << YAML::Value << t.plant.stiffness;
    out << YAML::Key << "damping" << YAML::Value << t.plant.damping;
    out << YAML::Key << "resistance" << YAML::Value << t.plant.resistance;
    out << YAML::Key << "area_permittivity" << YAML::Value << t.plant.area_permittivity;
    out << YAML::Key << "rest_length" << YAML::Value << t.plant.rest_length;
    out << YAML::EndMap;
    out << YAML::Key << "regulation" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "q_star" << YAML::Value << t.regulation.q_star;
    out << YAML::Key << "gamma1" << YAML::Value << t.regulation.gamma1;
    out << YAML::Key << "alpha3" << YAML::Value << t.regulation.alpha3;
    out << YAML::EndMap;
    out << YAML::Key << "oscillation" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "q_star" << YAML::Value << t.oscillation.q_star;
    out << YAML::Key << "alpha1" << YAML::Value << t.oscillation.alpha1;
    out << YAML::Key << "alpha2" << YAML::Value << t.oscillation.alpha2;
    out << YAML::Key << "alpha3" << YAML::Value << t.oscillation.alpha3;
    out << YAML::Key << "alpha4" << YAML::Value << t.oscillation.alpha4;
    out << YAML::Key << "lambda1" << YAML::Value << t.oscillation.lambda1;
    out << YAML::Key << "lambda2" << YAML::Value << t.oscillation.lambda2;
    out << YAML::Key << "gamma1" << YAML::Value << t.oscillation.gamma1;
    out << YAML::Key << "gamma2" << YAML::Value << t.oscillation.gamma2;
    out << YAML::Key << "gamma3" << YAML::Value << t.oscillation.gamma3;
    out << YAML::EndMap;
    out << YAML::Key << "loss" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "lambda_mc" << YAML::Value << t.total.lambda_mc;
    out << YAML::Key << "gamma_sparse" << YAML::Value << t.total.gamma_sparse;
    out << YAML::EndMap;
    if (!cfg.output_dir.empty())
        out << YAML::Key << "output_dir" << YAML::Value << cfg.output_dir;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

void save_config(const std::filesystem::path& path, const RunConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
    out << config_to_yaml(cfg);
    if (!out) throw ConfigError("failed writing " + path.string());
}

}  // namespace idapbc
