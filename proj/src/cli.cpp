#include "ems/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "ems/config.hpp"
#include "ems/error.hpp"
#include "ems/harness.hpp"
#include "ems/models.hpp"
#include "ems/random.hpp"
#include "ems/synthetic.hpp"
#include "ems/text.hpp"

namespace ems::cli {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string families;
    std::string techniques;
};

void write_file(const fs::path& path, std::string_view contents) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream file(path, std::ios::binary);
    if (!file || !file.write(contents.data(), static_cast<std::streamsize>(contents.size()))) {
        throw DataError("cannot write " + path.string());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

class Session {
public:
    Session(const GlobalOptions& opts, std::ostream& out) : out_(out) {
        if (opts.config.empty()) throw ConfigError("--config", "a config file is required");
        cfg_ = config::load_config(opts.config);
        if (opts.seed) {
            cfg_.matrix.seed = *opts.seed;
            cfg_.mapping.seed = *opts.seed;
        }
        try {
            if (!opts.families.empty()) {
                cfg_.matrix.families.clear();
                for (const auto& f : split_list(opts.families)) cfg_.matrix.families.push_back(models::parse_family(f));
            }
            if (!opts.techniques.empty()) {
                cfg_.matrix.techniques.clear();
                for (const auto& t : split_list(opts.techniques)) {
                    cfg_.matrix.techniques.push_back(harness::parse_technique(t));
                }
            }
            cfg_.matrix.validate();
        } catch (const ValidationError& e) {
            throw ConfigError(opts.families.empty() ? "--techniques" : "--families", e.what());
        }
        if (!opts.out.empty()) {
            out_dir_ = opts.out;
        } else if (!cfg_.out_dir.empty()) {
            out_dir_ = cfg_.out_dir;
        } else if (const char* env = std::getenv("EMS_OUT_DIR"); env && *env) {
            out_dir_ = env;
        } else {
            out_dir_ = "ems_out";
        }
    }

    config::RunConfig& cfg() { return cfg_; }
    const fs::path& out_dir() const { return out_dir_; }
    std::string tag() const { return std::string(data::to_string(cfg_.schema)); }

    const config::LoadedData& data() {
        if (!loaded_) loaded_ = config::load_dataset(cfg_);
        return *loaded_;
    }

    std::pair<data::AnnotatedDataset, data::AnnotatedDataset> split() {
        return data::split(data().dataset, cfg_.mapping.split_fraction, cfg_.mapping.seed);
    }

    std::string snapshot() { return config::snapshot(cfg_, data().digest); }

    fs::path write(const std::string& name, std::string_view contents) {
        const fs::path path = out_dir_ / name;
        write_file(path, contents);
        out_ << "wrote " << path.string() << '\n';
        return path;
    }

private:
    std::ostream& out_;
    config::RunConfig cfg_;
    fs::path out_dir_;
    std::optional<config::LoadedData> loaded_;
};

double share(const std::vector<int>& labels) {
    return labels.empty() ? 0.0
                          : static_cast<double>(std::count(labels.begin(), labels.end(), 1)) /
                                static_cast<double>(labels.size());
}

int cmd_synth(const std::string& schema_name, std::uint64_t seed, const std::string& path, std::ostream& out) {
    data::Schema schema;
    try {
        schema = data::parse_schema(schema_name);
    } catch (const ValidationError& e) {
        throw ConfigError("--schema", e.what());
    }
    const std::string csv =
        schema == data::Schema::Admissions ? synthetic::admissions_csv(seed) : synthetic::loans_csv(seed);
    write_file(path, csv);
    out << "wrote " << path << " (sha256 " << sha256_hex(csv) << ")\n";
    return kExitOk;
}

int cmd_prepare(Session& s, std::ostream& out) {
    const auto& loaded = s.data();
    const auto& d = loaded.dataset;
    out << "rows: " << d.rows() << '\n';
    out << "original positive share: " << format_number(share(d.label)) << '\n';
    out << "moral positive share: " << format_number(share(d.moral_label)) << '\n';
    if (d.diagnostics.saturated_income > 0) {
        out << "rows with non-positive income (severity saturated): " << d.diagnostics.saturated_income << '\n';
    }
    s.write(s.tag() + "_annotated.csv", data::annotated_csv(d));
    s.write(s.tag() + "_moral.csv", data::moral_csv(d));
    s.write(s.tag() + "_snapshot.ini", s.snapshot());
    return kExitOk;
}

harness::Technique make_technique(const std::string& name, double kappa, double theta, double lambda) {
    try {
        switch (harness::parse_technique(name)) {
            case harness::TechniqueKind::None: return harness::Technique::none();
            case harness::TechniqueKind::PenaltyWeights: return harness::Technique::penalty(kappa);
            case harness::TechniqueKind::EmsLoss: return harness::Technique::ems(theta, lambda);
            case harness::TechniqueKind::OverrideHard:
                throw ConfigError("--technique", "override is applied at evaluation time (evaluate --override)");
        }
    } catch (const ValidationError& e) {
        throw ConfigError("--technique", e.what());
    }
    return harness::Technique::none();
}

int cmd_train(Session& s, const std::string& family_name, const harness::Technique& technique, std::ostream& out) {
    models::Family family;
    try {
        family = models::parse_family(family_name);
    } catch (const ValidationError& e) {
        throw ConfigError("--family", e.what());
    }
    auto [train, test] = s.split();
    const auto settings = s.cfg().matrix.settings_for(family);
    models::TrainConfig cfg = settings.train;
    cfg.seed = derive_seed(s.cfg().matrix.seed, models::short_name(family));
    std::vector<double> weights;
    try {
        if (technique.kind == harness::TechniqueKind::PenaltyWeights) {
            weights = harness::apply_penalty_weights(train, technique.kappa);
        }
        if (technique.kind == harness::TechniqueKind::EmsLoss) {
            cfg.theta = technique.theta;
            cfg.lambda = technique.lambda;
        }
        cfg.validate();
    } catch (const ValidationError& e) {
        throw ConfigError("--technique", e.what());
    }
    models::FittedModel model;
    try {
        model = models::fit(settings.spec, train, models::Target::Original, weights, cfg);
    } catch (const ValidationError& e) {
        throw ConfigError("--family", e.what());
    }
    const std::string name = s.tag() + "_" + std::string(models::short_name(family)) + "_" +
                             std::string(harness::technique_tag(technique.kind)) + ".json";
    out << "trained " << models::display_name(family) << " on " << train.rows() << " rows\n";
    if (!model.loss_trace.empty()) out << "final training loss: " << format_number(model.loss_trace.back()) << '\n';
    s.write(name, models::save_model(model));
    return kExitOk;
}

int cmd_evaluate(Session& s, const std::string& model_path, bool override_hard, std::ostream& out) {
    const auto model = models::load_model(read_file(model_path));
    auto [train, test] = s.split();
    auto preds = harness::Predictions::from_proba(models::predict_proba(model, test.features));
    harness::Technique technique = harness::Technique::none();
    if (override_hard) {
        preds = harness::apply_override(preds, test);
        technique = harness::Technique::override_hard();
    } else if (model.config.lambda > 0.0) {
        technique = harness::Technique::ems(model.config.theta, model.config.lambda);
    }
    auto row = harness::compute_metrics(test.label, preds, test.moral_label);
    row.family = model.spec.family;
    row.technique = technique;
    harness::ResultsTable table{s.tag(), s.snapshot(), s.cfg().matrix.seed, {row}};
    out << harness::results_markdown(table);
    s.write(fs::path(model_path).stem().string() + "_evaluation.csv", harness::results_csv(table));
    return kExitOk;
}

int cmd_compare(Session& s, std::ostream& out) {
    auto [train, test] = s.split();
    auto table = harness::run_matrix(s.tag(), train, test, s.cfg().matrix);
    table.snapshot = s.snapshot();
    out << harness::results_markdown(table);
    s.write(s.tag() + "_results.csv", harness::results_csv(table));
    s.write(s.tag() + "_results.md", harness::results_markdown(table));
    s.write(s.tag() + "_snapshot.ini", table.snapshot);
    std::size_t failed = 0;
    for (const auto& row : table.rows) {
        if (!row.error.empty()) {
            ++failed;
            out << "cell failed: " << harness::method_label(row) << ": " << row.error << '\n';
        }
    }
    return !table.rows.empty() && failed == table.rows.size() ? kExitTraining : kExitOk;
}

int cmd_sweep(Session& s, const std::string& axis_name, const std::string& grid_text, std::ostream& out) {
    harness::SweepAxis axis;
    std::vector<double> grid;
    try {
        axis = harness::parse_axis(axis_name);
    } catch (const ValidationError& e) {
        throw ConfigError("--axis", e.what());
    }
    for (const auto& item : split_list(grid_text)) {
        const auto v = parse_number(item);
        if (!v) throw ConfigError("--grid", "not a number: '" + item + "'");
        grid.push_back(*v);
    }
    if (grid.empty()) throw ConfigError("--grid", "grid must not be empty");
    auto [train, test] = s.split();
    harness::ResultsTable table;
    try {
        table = harness::sweep(s.tag(), train, test, axis, grid, s.cfg().matrix);
    } catch (const ValidationError& e) {
        throw ConfigError("--grid", e.what());
    }
    table.snapshot = s.snapshot();
    out << harness::results_markdown(table);
    const std::string stem = s.tag() + "_sweep_" + std::string(harness::axis_name(axis));
    s.write(stem + ".csv", harness::results_csv(table));
    s.write(stem + ".md", harness::results_markdown(table));
    for (const auto& [metric, csv] : harness::plot_csvs(table, axis)) s.write(stem + "_" + metric + ".csv", csv);
    const bool all_failed = std::all_of(table.rows.begin(), table.rows.end(), [](const auto& r) { return !r.error.empty(); });
    return all_failed ? kExitTraining : kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Moral annotation, ethical-competence training and evaluation for tabular classifiers", "emsctl"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions opts;
    std::uint64_t seed_value = 0;
    app.add_option("--config", opts.config, "INI run configuration");
    auto* seed_opt = app.add_option("--seed", seed_value, "master seed (overrides experiment.seed)");
    app.add_option("--out", opts.out, "output directory (default: config out_dir, then $EMS_OUT_DIR, then ./ems_out)");
    app.add_option("--families", opts.families, "comma-separated families: lr,nb,rf,svm,nn");
    app.add_option("--techniques", opts.techniques, "comma-separated techniques: baseline,penalty,override,ems");

    std::string synth_schema;
    std::uint64_t synth_seed = 7;
    std::string synth_path;
    auto* synth = app.add_subcommand("synth", "write a synthetic dataset with the real schema and row count");
    synth->add_option("--schema", synth_schema, "admissions or loans")->required();
    synth->add_option("--data-seed", synth_seed, "generator seed");
    synth->add_option("--path", synth_path, "output CSV")->required();

    auto* prepare = app.add_subcommand("prepare", "annotate the dataset and write the moral-label variants");

    std::string family;
    std::string technique = "baseline";
    double kappa = 5.0;
    double theta = 0.05;
    double lambda = 1.0;
    auto* train = app.add_subcommand("train", "fit one model on the training split and save it");
    train->add_option("--family", family, "lr, nb, rf, svm or nn")->required();
    train->add_option("--technique", technique, "baseline, penalty or ems");
    train->add_option("--kappa", kappa, "penalty strength");
    train->add_option("--theta", theta, "EMS tail fraction");
    train->add_option("--lambda", lambda, "EMS loss weight");

    std::string model_path;
    bool override_hard = false;
    auto* evaluate = app.add_subcommand("evaluate", "score a saved model on the test split");
    evaluate->add_option("--model", model_path, "saved model JSON")->required();
    evaluate->add_flag("--override", override_hard, "replace decisions with moral labels");

    auto* compare = app.add_subcommand("compare", "run the full technique x family matrix");

    std::string axis;
    std::string grid;
    auto* sweep = app.add_subcommand("sweep", "vary theta, lambda or kappa");
    sweep->add_option("--axis", axis, "theta, lambda or kappa")->required();
    sweep->add_option("--grid", grid, "comma-separated values")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }
    if (seed_opt->count() > 0) opts.seed = seed_value;

    try {
        if (synth->parsed()) return cmd_synth(synth_schema, synth_seed, synth_path, out);
        Session session(opts, out);
        if (prepare->parsed()) return cmd_prepare(session, out);
        if (train->parsed()) {
            return cmd_train(session, family, make_technique(technique, kappa, theta, lambda), out);
        }
        if (evaluate->parsed()) return cmd_evaluate(session, model_path, override_hard, out);
        if (compare->parsed()) return cmd_compare(session, out);
        if (sweep->parsed()) return cmd_sweep(session, axis, grid, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const TrainingError& e) {
        err << "training error: " << e.what() << '\n';
        return kExitTraining;
    } catch (const ValidationError& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}

}  // namespace ems::cli
