#include "idapbc/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace idapbc {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// One line per field; any change to the run setup changes the hash.
std::string canonical_description(const TrainConfig& cfg) {
    std::ostringstream out;
    out << "epochs=" << cfg.epochs << "\nlearning_rate=" << fmt(cfg.learning_rate)
        << "\nlr_schedule=" << lr_schedule_name(cfg.lr_schedule)
        << "\nadam_beta1=" << fmt(cfg.adam_beta1) << "\nadam_beta2=" << fmt(cfg.adam_beta2)
        << "\nadam_eps=" << fmt(cfg.adam_eps) << "\nseed=" << cfg.seed
        << "\nhorizon=" << fmt(cfg.horizon) << "\nsteps=" << cfg.steps
        << "\ntask=" << task_kind_name(cfg.task) << "\nregulation.q_star=" << fmt(cfg.regulation.q_star)
        << "\nregulation.gamma1=" << fmt(cfg.regulation.gamma1)
        << "\nregulation.alpha3=" << fmt(cfg.regulation.alpha3)
        << "\noscillation.q_star=" << fmt(cfg.oscillation.q_star)
        << "\noscillation.alpha1=" << fmt(cfg.oscillation.alpha1)
        << "\noscillation.alpha2=" << fmt(cfg.oscillation.alpha2)
        << "\noscillation.alpha3=" << fmt(cfg.oscillation.alpha3)
        << "\noscillation.alpha4=" << fmt(cfg.oscillation.alpha4)
        << "\noscillation.lambda1=" << fmt(cfg.oscillation.lambda1)
        << "\noscillation.lambda2=" << fmt(cfg.oscillation.lambda2)
        << "\noscillation.gamma1=" << fmt(cfg.oscillation.gamma1)
        << "\noscillation.gamma2=" << fmt(cfg.oscillation.gamma2)
        << "\noscillation.gamma3=" << fmt(cfg.oscillation.gamma3)
        << "\nlambda_mc=" << fmt(cfg.total.lambda_mc)
        << "\ngamma_sparse=" << fmt(cfg.total.gamma_sparse) << "\nplant.mass=" << fmt(cfg.plant.mass)
        << "\nplant.stiffness=" << fmt(cfg.plant.stiffness)
        << "\nplant.damping=" << fmt(cfg.plant.damping)
        << "\nplant.resistance=" << fmt(cfg.plant.resistance)
        << "\nplant.area_permittivity=" << fmt(cfg.plant.area_permittivity)
        << "\nplant.rest_length=" << fmt(cfg.plant.rest_length)
        << "\nlibrary.n_vars=" << cfg.library.n_vars
        << "\nlibrary.max_degree=" << cfg.library.max_degree << "\nq0=" << fmt(cfg.q0)
        << "\np0=" << fmt(cfg.p0) << "\ncharge0=" << fmt(cfg.charge0)
        << "\nlearn_charge_for_regulation=" << (cfg.learn_charge_for_regulation ? 1 : 0)
        << "\ninit_log_alpha=" << fmt(cfg.init_log_alpha)
        << "\ninit_xi_scale=" << fmt(cfg.init_xi_scale) << "\n";
    return out.str();
}

std::string hash_to_hex(std::uint64_t h) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::uint64_t hex_to_hash(const std::string& s) {
    if (s.size() != 18 || s[0] != '0' || s[1] != 'x')
        throw CheckpointError("bad config hash field: " + s);
    try {
        std::size_t used = 0;
        const std::uint64_t h = std::stoull(s.substr(2), &used, 16);
        if (used != 16) throw CheckpointError("bad config hash field: " + s);
        return h;
    } catch (const std::logic_error&) {
        throw CheckpointError("bad config hash field: " + s);
    }
}

}  // namespace

std::uint64_t config_fingerprint(const TrainConfig& cfg) {
    const std::string text = canonical_description(cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string model_to_json(const DesiredSystem& ds, const TrainConfig& cfg, int epoch, double loss) {
    ds.validate();
    nlohmann::ordered_json j;
    j["format"] = "idapbc-model";
    j["version"] = 1;
    j["library"] = {{"n_vars", ds.library().n_vars}, {"max_degree", ds.library().max_degree}};
    const HardConcreteConstants& hc = ds.entries[0].constants;
    j["hard_concrete"] = {{"beta", hc.beta}, {"gamma", hc.gamma}, {"zeta", hc.zeta}};
    nlohmann::ordered_json entries;
    for (int m = 0; m < kNumDesiredEntries; ++m) {
        const SparseLinearModel& model = ds.entries[m];
        entries[desired_entry_name(static_cast<DesiredEntry>(m))] = {{"xi", model.xi},
                                                                     {"log_alpha", model.log_alpha}};
    }
    j["entries"] = std::move(entries);
    j["initial_charge"] = ds.initial_charge;
    j["epoch"] = epoch;
    j["loss"] = loss;
    j["config_hash"] = hash_to_hex(config_fingerprint(cfg));
    return j.dump(2) + "\n";
}

void save_model(const std::filesystem::path& path, const DesiredSystem& ds, const TrainConfig& cfg,
                int epoch, double loss) {
    std::ofstream out(path);
    if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
    out << model_to_json(ds, cfg, epoch, loss);
    if (!out) throw CheckpointError("failed writing " + path.string());
}

LoadedModel model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw CheckpointError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "idapbc-model")
            throw CheckpointError("not an idapbc-model file");
        if (j.at("version").get<int>() != 1)
            throw CheckpointError("unsupported model version " + j.at("version").dump());

        const auto& libj = j.at("library");
        const PolynomialLibrary lib =
            PolynomialLibrary::make(libj.at("n_vars").get<int>(), libj.at("max_degree").get<int>());

        LoadedModel loaded;
        loaded.model = DesiredSystem::make(lib);
        const auto& hcj = j.at("hard_concrete");
        HardConcreteConstants hc;
        hc.beta = hcj.at("beta").get<double>();
        hc.gamma = hcj.at("gamma").get<double>();
        hc.zeta = hcj.at("zeta").get<double>();
        hc.validate();

        for (int m = 0; m < kNumDesiredEntries; ++m) {
            const auto& ej = j.at("entries").at(desired_entry_name(static_cast<DesiredEntry>(m)));
            SparseLinearModel& model = loaded.model.entries[m];
            model.constants = hc;
            model.xi = ej.at("xi").get<std::vector<double>>();
            model.log_alpha = ej.at("log_alpha").get<std::vector<double>>();
            if (model.xi.size() != lib.size() || model.log_alpha.size() != lib.size())
                throw CheckpointError("entry parameter length does not match the library");
        }
        loaded.model.initial_charge = j.at("initial_charge").get<double>();
        loaded.epoch = j.at("epoch").get<int>();
        loaded.loss = j.at("loss").get<double>();
        loaded.config_hash = hex_to_hash(j.at("config_hash").get<std::string>());
        loaded.model.validate();
        return loaded;
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("malformed model file: ") + e.what());
    }
}

LoadedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CheckpointError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

}  // namespace idapbc
