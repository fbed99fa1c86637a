#include "ems/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ems/error.hpp"
#include "ems/synthetic.hpp"
#include "ems/text.hpp"

namespace ems::config {

namespace {

namespace pt = boost::property_tree;
using models::Family;

using Handler = std::function<void(const std::string& value)>;

double to_number(const std::string& key, const std::string& value) {
    const auto parsed = parse_number(trim(value));
    if (!parsed) throw ConfigError(key, "expected a finite number, got '" + value + "'");
    return *parsed;
}

int to_int(const std::string& key, const std::string& value) {
    const double v = to_number(key, value);
    if (v != std::floor(v) || v < -1e9 || v > 1e9) throw ConfigError(key, "expected an integer, got '" + value + "'");
    return static_cast<int>(v);
}

std::uint64_t to_seed(const std::string& key, const std::string& value) {
    const auto text = trim(value);
    std::uint64_t seed = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
        throw ConfigError(key, "expected a non-negative integer seed, got '" + value + "'");
    }
    return seed;
}

int to_sign(const std::string& key, const std::string& value) {
    const int s = to_int(key, value);
    if (s != -1 && s != 1) throw ConfigError(key, "must be -1 or +1");
    return s;
}

std::vector<double> to_numbers(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& item : split_list(value)) out.push_back(to_number(key, item));
    if (out.empty()) throw ConfigError(key, "list must not be empty");
    return out;
}

// "NAME:score,NAME:score"
std::map<std::string, double> to_score_map(const std::string& key, const std::string& value) {
    std::map<std::string, double> out;
    for (const auto& item : split_list(value)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError(key, "expected NAME:score pairs, got '" + item + "'");
        const std::string name(trim(std::string_view(item).substr(0, colon)));
        if (name.empty()) throw ConfigError(key, "empty category name");
        out[name] = to_number(key, item.substr(colon + 1));
    }
    if (out.empty()) throw ConfigError(key, "map must not be empty");
    return out;
}

template <typename T, typename Parse>
std::vector<T> to_list(const std::string& key, const std::string& value, Parse parse) {
    std::vector<T> out;
    for (const auto& item : split_list(value)) {
        try {
            out.push_back(parse(item));
        } catch (const ValidationError& e) {
            throw ConfigError(key, e.what());
        }
    }
    if (out.empty()) throw ConfigError(key, "list must not be empty");
    return out;
}

std::string join_numbers(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format_number(values[i]);
    return out;
}

std::string join_scores(const std::map<std::string, double>& values) {
    std::string out;
    for (const auto& [name, score] : values) out += (out.empty() ? "" : ",") + name + ":" + format_number(score);
    return out;
}

// Re-labels a ValidationError whose message starts with a field name as a
// ConfigError on the matching section.key.
[[noreturn]] void rethrow_as_config(const ValidationError& e, const std::map<std::string, std::string>& keys,
                                    const std::string& fallback) {
    const std::string message = e.what();
    const std::string field = message.substr(0, message.find(' '));
    const auto it = keys.find(field);
    throw ConfigError(it != keys.end() ? it->second : fallback, message);
}

std::map<std::string, Handler> family_handlers(Family family, harness::FamilySettings& s, const std::string& section) {
    std::map<std::string, Handler> h;
    auto key = [section](const char* name) { return section + "." + name; };
    if (family == Family::LogisticRegression || family == Family::LinearSVM || family == Family::NeuralNet) {
        h["epochs"] = [&s, key](const std::string& v) { s.train.epochs = to_int(key("epochs"), v); };
        h["learning_rate"] = [&s, key](const std::string& v) {
            s.train.learning_rate = to_number(key("learning_rate"), v);
        };
        h["batch_size"] = [&s, key](const std::string& v) { s.train.batch_size = to_int(key("batch_size"), v); };
        h["l2"] = [&s, key](const std::string& v) { s.train.l2 = to_number(key("l2"), v); };
    }
    if (family == Family::RandomForest) {
        h["trees"] = [&s, key](const std::string& v) { s.spec.trees = to_int(key("trees"), v); };
        h["max_depth"] = [&s, key](const std::string& v) { s.spec.max_depth = to_int(key("max_depth"), v); };
        h["min_samples_split"] = [&s, key](const std::string& v) {
            s.spec.min_samples_split = to_int(key("min_samples_split"), v);
        };
    }
    if (family == Family::GaussianNaiveBayes) {
        h["variance_floor"] = [&s, key](const std::string& v) {
            s.spec.variance_floor = to_number(key("variance_floor"), v);
        };
    }
    if (family == Family::NeuralNet) {
        h["hidden_layers"] = [&s, key](const std::string& v) {
            s.spec.hidden_layers.clear();
            for (double width : to_numbers(key("hidden_layers"), v)) {
                s.spec.hidden_layers.push_back(to_int(key("hidden_layers"), format_number(width)));
            }
        };
        h["momentum"] = [&s, key](const std::string& v) { s.spec.momentum = to_number(key("momentum"), v); };
    }
    return h;
}

}  // namespace

RunConfig RunConfig::defaults(data::Schema schema) {
    RunConfig cfg;
    cfg.schema = schema;
    for (Family f : models::kAllFamilies) {
        cfg.matrix.settings[f] = {models::ModelSpec::defaults(f), models::TrainConfig::defaults(f)};
    }
    return cfg;
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    pt::ptree tree;
    try {
        std::istringstream in{std::string(text)};
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("", std::string("malformed config: ") + e.what());
    }

    // Schema first: nothing else depends on it, but it must be known to build defaults.
    data::Schema schema = data::Schema::Admissions;
    if (auto data_section = tree.get_child_optional("data")) {
        if (auto name = data_section->get_optional<std::string>("schema")) {
            try {
                schema = data::parse_schema(trim(*name));
            } catch (const ValidationError& e) {
                throw ConfigError("data.schema", e.what());
            }
        } else {
            throw ConfigError("data.schema", "required key missing");
        }
    } else {
        throw ConfigError("data", "required section missing");
    }

    RunConfig cfg = RunConfig::defaults(schema);
    std::optional<double> alpha, beta, gamma;
    bool philosophy_set = false;

    std::map<std::string, std::map<std::string, Handler>> sections;
    sections["data"] = {
        {"schema", [](const std::string&) {}},
        {"path", [&](const std::string& v) { cfg.data_path = std::filesystem::path(std::string(trim(v))); }},
        {"synthetic_seed", [&](const std::string& v) { cfg.synthetic_seed = to_seed("data.synthetic_seed", v); }},
        {"sha256", [&](const std::string& v) { cfg.expected_digest = std::string(trim(v)); }},
    };
    sections["ethics"] = {
        {"philosophy",
         [&](const std::string& v) {
             cfg.philosophy = std::string(trim(v));
             philosophy_set = true;
             try {
                 cfg.mapping.weights = ethics::NormativeWeights::preset(cfg.philosophy);
             } catch (const ValidationError& e) {
                 throw ConfigError("ethics.philosophy", e.what());
             }
         }},
        {"alpha", [&](const std::string& v) { alpha = to_number("ethics.alpha", v); }},
        {"beta", [&](const std::string& v) { beta = to_number("ethics.beta", v); }},
        {"gamma", [&](const std::string& v) { gamma = to_number("ethics.gamma", v); }},
        {"tau_default", [&](const std::string& v) { cfg.mapping.tau_default = to_number("ethics.tau_default", v); }},
        {"sign_severity", [&](const std::string& v) { cfg.mapping.signs.severity = to_sign("ethics.sign_severity", v); }},
        {"sign_utility", [&](const std::string& v) { cfg.mapping.signs.utility = to_sign("ethics.sign_utility", v); }},
        {"sign_duration", [&](const std::string& v) { cfg.mapping.signs.duration = to_sign("ethics.sign_duration", v); }},
        {"sign_intention",
         [&](const std::string& v) { cfg.mapping.signs.intention = to_sign("ethics.sign_intention", v); }},
        {"sign_upheld", [&](const std::string& v) { cfg.mapping.signs.upheld = to_sign("ethics.sign_upheld", v); }},
        {"sign_violated", [&](const std::string& v) { cfg.mapping.signs.violated = to_sign("ethics.sign_violated", v); }},
    };
    sections["mapping"] = {
        {"pass_mark", [&](const std::string& v) { cfg.mapping.pass_mark = to_number("mapping.pass_mark", v); }},
        {"penalty_high", [&](const std::string& v) { cfg.mapping.penalty_high = to_number("mapping.penalty_high", v); }},
        {"penalty_low", [&](const std::string& v) { cfg.mapping.penalty_low = to_number("mapping.penalty_low", v); }},
        {"income_split", [&](const std::string& v) { cfg.mapping.income_split = to_number("mapping.income_split", v); }},
        {"admit_cutoff", [&](const std::string& v) { cfg.mapping.admit_cutoff = to_number("mapping.admit_cutoff", v); }},
        {"oversample_floor",
         [&](const std::string& v) { cfg.mapping.oversample_floor = to_number("mapping.oversample_floor", v); }},
        {"intent_scores",
         [&](const std::string& v) { cfg.mapping.intent_scores = to_score_map("mapping.intent_scores", v); }},
        {"grade_scale", [&](const std::string& v) { cfg.mapping.grade_scale = to_score_map("mapping.grade_scale", v); }},
    };
    sections["experiment"] = {
        {"seed", [&](const std::string& v) { cfg.matrix.seed = to_seed("experiment.seed", v); }},
        {"test_fraction",
         [&](const std::string& v) { cfg.mapping.split_fraction = to_number("experiment.test_fraction", v); }},
        {"families",
         [&](const std::string& v) {
             cfg.matrix.families = to_list<Family>("experiment.families", v, [](const std::string& s) {
                 return models::parse_family(trim(s));
             });
         }},
        {"techniques",
         [&](const std::string& v) {
             cfg.matrix.techniques = to_list<harness::TechniqueKind>(
                 "experiment.techniques", v, [](const std::string& s) { return harness::parse_technique(trim(s)); });
         }},
        {"kappa", [&](const std::string& v) { cfg.matrix.kappa = to_number("experiment.kappa", v); }},
        {"thetas", [&](const std::string& v) { cfg.matrix.thetas = to_numbers("experiment.thetas", v); }},
        {"ems_lambda", [&](const std::string& v) { cfg.matrix.ems_lambda = to_number("experiment.ems_lambda", v); }},
        {"sweep_theta", [&](const std::string& v) { cfg.matrix.sweep_theta = to_number("experiment.sweep_theta", v); }},
        {"out_dir", [&](const std::string& v) { cfg.out_dir = std::filesystem::path(std::string(trim(v))); }},
    };
    for (Family f : models::kAllFamilies) {
        const std::string name(models::short_name(f));
        sections[name] = family_handlers(f, cfg.matrix.settings[f], name);
    }

    for (const auto& [section, body] : tree) {
        const auto handlers = sections.find(section);
        if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside of any section");
        if (handlers == sections.end()) throw ConfigError(section, "unknown section [" + section + "]");
        for (const auto& [key, value] : body) {
            const auto handler = handlers->second.find(key);
            if (handler == handlers->second.end()) throw ConfigError(section + "." + key, "unknown key");
            handler->second(value.data());
        }
    }

    if (alpha || beta || gamma) {
        if (!alpha || !beta || !gamma) {
            throw ConfigError("ethics.alpha, ethics.beta, ethics.gamma", "set all three weights or none");
        }
        const ethics::NormativeWeights explicit_weights{*alpha, *beta, *gamma};
        // A named philosophy plus explicit weights is accepted when they agree (snapshots write both).
        if (philosophy_set) {
            const auto& named = cfg.mapping.weights;
            if (std::abs(named.alpha - *alpha) > 1e-12 || std::abs(named.beta - *beta) > 1e-12 ||
                std::abs(named.gamma - *gamma) > 1e-12) {
                throw ConfigError("ethics.philosophy", "conflicts with the explicit alpha, beta, gamma");
            }
        } else {
            cfg.philosophy = "custom";
        }
        cfg.mapping.weights = explicit_weights;
    }
    try {
        cfg.mapping.weights.validate();
    } catch (const ValidationError& e) {
        throw ConfigError("ethics.alpha, ethics.beta, ethics.gamma", e.what());
    }
    cfg.mapping.seed = cfg.matrix.seed;

    try {
        cfg.mapping.validate();
    } catch (const ValidationError& e) {
        rethrow_as_config(e,
                          {{"tau_default", "ethics.tau_default"},
                           {"sign", "ethics.sign_*"},
                           {"split_fraction", "experiment.test_fraction"},
                           {"pass_mark", "mapping.pass_mark"},
                           {"penalty_low", "mapping.penalty_low"},
                           {"penalty_high", "mapping.penalty_high"},
                           {"income_split", "mapping.income_split"},
                           {"admit_cutoff", "mapping.admit_cutoff"},
                           {"oversample_floor", "mapping.oversample_floor"},
                           {"intent_scores", "mapping.intent_scores"},
                           {"grade_scale", "mapping.grade_scale"}},
                          "mapping");
    }
    for (const auto& [family, s] : cfg.matrix.settings) {
        const std::string section(models::short_name(family));
        std::map<std::string, std::string> keys;
        for (const char* k : {"epochs", "learning_rate", "batch_size", "l2", "trees", "max_depth", "min_samples_split",
                              "hidden_layers", "hidden", "momentum", "variance_floor"}) {
            keys[k] = section + "." + k;
        }
        keys["hidden"] = section + ".hidden_layers";
        try {
            s.spec.validate();
            s.train.validate();
        } catch (const ValidationError& e) {
            rethrow_as_config(e, keys, section);
        }
    }
    try {
        cfg.matrix.validate();
    } catch (const ValidationError& e) {
        rethrow_as_config(e,
                          {{"kappa", "experiment.kappa"},
                           {"lambda", "experiment.ems_lambda"},
                           {"theta", "experiment.thetas"},
                           {"no", "experiment.families"}},
                          "experiment");
    }

    if (!cfg.synthetic_seed) {
        if (cfg.data_path.empty()) throw ConfigError("data.path", "required unless data.synthetic_seed is set");
        if (cfg.data_path.is_relative() && !base_dir.empty()) cfg.data_path = base_dir / cfg.data_path;
    }
    if (!cfg.out_dir.empty() && cfg.out_dir.is_relative() && !base_dir.empty()) cfg.out_dir = base_dir / cfg.out_dir;
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot read config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.parent_path());
}

std::string snapshot(const RunConfig& cfg, std::string_view dataset_digest) {
    std::ostringstream out;
    const auto& m = cfg.mapping;
    out << "[data]\n";
    out << "schema = " << data::to_string(cfg.schema) << '\n';
    if (cfg.synthetic_seed) {
        out << "synthetic_seed = " << *cfg.synthetic_seed << '\n';
    } else {
        out << "path = " << cfg.data_path.string() << '\n';
    }
    out << "sha256 = " << dataset_digest << "\n\n";

    out << "[ethics]\n";
    if (cfg.philosophy == "custom") {
        out << "; philosophy: custom\n";
    } else {
        out << "philosophy = " << cfg.philosophy << '\n';
    }
    out << "alpha = " << format_number(m.weights.alpha) << '\n';
    out << "beta = " << format_number(m.weights.beta) << '\n';
    out << "gamma = " << format_number(m.weights.gamma) << '\n';
    out << "tau_default = " << format_number(m.tau_default) << '\n';
    out << "sign_severity = " << m.signs.severity << '\n';
    out << "sign_utility = " << m.signs.utility << '\n';
    out << "sign_duration = " << m.signs.duration << '\n';
    out << "sign_intention = " << m.signs.intention << '\n';
    out << "sign_upheld = " << m.signs.upheld << '\n';
    out << "sign_violated = " << m.signs.violated << "\n\n";

    out << "[mapping]\n";
    out << "pass_mark = " << format_number(m.pass_mark) << '\n';
    out << "penalty_high = " << format_number(m.penalty_high) << '\n';
    out << "penalty_low = " << format_number(m.penalty_low) << '\n';
    out << "income_split = " << format_number(m.income_split) << '\n';
    out << "admit_cutoff = " << format_number(m.admit_cutoff) << '\n';
    out << "oversample_floor = " << format_number(m.oversample_floor) << '\n';
    out << "intent_scores = " << join_scores(m.intent_scores) << '\n';
    out << "grade_scale = " << join_scores(m.grade_scale) << "\n\n";

    const auto& x = cfg.matrix;
    out << "[experiment]\n";
    out << "seed = " << x.seed << '\n';
    out << "test_fraction = " << format_number(m.split_fraction) << '\n';
    std::string families;
    for (Family f : x.families) families += (families.empty() ? "" : ",") + std::string(models::short_name(f));
    out << "families = " << families << '\n';
    std::string techniques;
    for (auto t : x.techniques) techniques += (techniques.empty() ? "" : ",") + std::string(harness::technique_tag(t));
    out << "techniques = " << techniques << '\n';
    out << "kappa = " << format_number(x.kappa) << '\n';
    out << "thetas = " << join_numbers(x.thetas) << '\n';
    out << "ems_lambda = " << format_number(x.ems_lambda) << '\n';
    out << "sweep_theta = " << format_number(x.sweep_theta) << '\n';

    for (Family f : models::kAllFamilies) {
        const auto s = x.settings_for(f);
        out << "\n[" << models::short_name(f) << "]\n";
        switch (f) {
            case Family::GaussianNaiveBayes:
                out << "variance_floor = " << format_number(s.spec.variance_floor) << '\n';
                break;
            case Family::RandomForest:
                out << "trees = " << s.spec.trees << '\n';
                out << "max_depth = " << s.spec.max_depth << '\n';
                out << "min_samples_split = " << s.spec.min_samples_split << '\n';
                break;
            case Family::NeuralNet: {
                std::string hidden;
                for (int h : s.spec.hidden_layers) hidden += (hidden.empty() ? "" : ",") + std::to_string(h);
                out << "hidden_layers = " << hidden << '\n';
                out << "momentum = " << format_number(s.spec.momentum) << '\n';
                [[fallthrough]];
            }
            case Family::LogisticRegression:
            case Family::LinearSVM:
                out << "epochs = " << s.train.epochs << '\n';
                out << "learning_rate = " << format_number(s.train.learning_rate) << '\n';
                out << "batch_size = " << s.train.batch_size << '\n';
                out << "l2 = " << format_number(s.train.l2) << '\n';
                break;
        }
    }
    return out.str();
}

LoadedData load_dataset(const RunConfig& cfg) {
    LoadedData out;
    if (cfg.synthetic_seed) {
        out.bytes = cfg.schema == data::Schema::Admissions ? synthetic::admissions_csv(*cfg.synthetic_seed)
                                                           : synthetic::loans_csv(*cfg.synthetic_seed);
    } else {
        std::ifstream in(cfg.data_path, std::ios::binary);
        if (!in) throw DataError("cannot read dataset " + cfg.data_path.string());
        std::ostringstream text;
        text << in.rdbuf();
        out.bytes = text.str();
    }
    out.digest = sha256_hex(out.bytes);
    if (cfg.expected_digest && *cfg.expected_digest != out.digest) {
        throw DataError("dataset digest " + out.digest + " does not match the pinned sha256 " + *cfg.expected_digest);
    }
    auto raw = data::parse_csv(out.bytes, cfg.schema);
    if (cfg.mapping.oversample_floor > 0.0) {
        const auto labels = data::target_labels(raw, cfg.mapping);
        raw = data::oversample_minority(raw, labels, cfg.mapping.oversample_floor, cfg.mapping.seed);
    }
    out.dataset = data::annotate(raw, cfg.mapping);
    return out;
}

}  // namespace ems::config
