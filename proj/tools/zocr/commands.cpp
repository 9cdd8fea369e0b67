#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "manifest.hpp"
#include "zocr/eval.hpp"
#include "zocr/knn.hpp"
#include "zocr/mlp.hpp"
#include "zocr/preprocess.hpp"
#include "zocr/raster.hpp"
#include "zocr/synthcorpus.hpp"
#include "zocr/zoning.hpp"

namespace zocr::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 42;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

fs::path classes_sidecar(const fs::path& file) {
    auto p = file;
    p += ".classes.tsv";
    return p;
}

std::vector<ClassInfo> read_sidecar(const fs::path& file) {
    const auto side = classes_sidecar(file);
    if (!fs::exists(side)) return {};
    return read_classes_tsv(side);
}

GridSpec parse_grid(const std::string& text) {
    try {
        return GridSpec::parse(text);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

FeatureTable load_features(const fs::path& path, const std::string& grid_text) {
    if (!fs::exists(path)) throw std::runtime_error(path.string() + ": features file not found");
    const auto classes = read_sidecar(path);
    if (grid_text.empty()) return read_feature_csv(path, classes);
    const auto grid = parse_grid(grid_text);
    auto table = read_feature_csv(path, classes, &grid);
    if (table.grid != grid)
        throw std::runtime_error(path.string() + ": column count does not match --grid " + grid.to_string());
    return table;
}

void check_fraction(double f) {
    if (!(f > 0.0 && f < 1.0)) throw UsageError("--train-frac must lie strictly between 0 and 1");
}

// Options shared by every MLP-training command.
struct MlpFlags {
    int epochs = 500;
    double lr = 10.0;
    std::size_t h1 = 32;
    std::size_t h2 = 32;
    std::optional<std::uint64_t> init_seed;
    std::optional<std::uint64_t> shuffle_seed;

    void add_to(CLI::App* sub) {
        sub->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
        sub->add_option("--lr", lr, "SGD learning rate")->capture_default_str();
        sub->add_option("--h1", h1, "First hidden layer size")->capture_default_str();
        sub->add_option("--h2", h2, "Second hidden layer size")->capture_default_str();
        sub->add_option("--init-seed", init_seed, "Weight init seed (default: --seed)");
        sub->add_option("--shuffle-seed", shuffle_seed, "Epoch shuffle seed (default: --seed)");
    }

    TrainHyperparams resolve(std::uint64_t seed) const {
        TrainHyperparams hp;
        hp.epochs = epochs;
        hp.learning_rate = lr;
        hp.h1 = h1;
        hp.h2 = h2;
        hp.init_seed = init_seed.value_or(seed);
        hp.shuffle_seed = shuffle_seed.value_or(seed);
        try {
            hp.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        return hp;
    }
};

void record_hp(RunManifest& man, const TrainHyperparams& hp) {
    man.config()["epochs"] = hp.epochs;
    man.config()["learning_rate"] = hp.learning_rate;
    man.config()["h1"] = hp.h1;
    man.config()["h2"] = hp.h2;
    man.config()["activation"] = MlpModel::activation();
    man.seeds()["init_seed"] = hp.init_seed;
    man.seeds()["shuffle_seed"] = hp.shuffle_seed;
}

EpochCallback epoch_logger(int every) {
    if (every <= 0) return {};
    return [every](const EpochRecord& rec, const MlpModel&) {
        if (rec.epoch % every == 0 || rec.epoch == 1)
            std::cerr << "epoch " << rec.epoch << " mse=" << fmt_double(rec.mse)
                      << " grad_norm=" << fmt_double(rec.grad_norm) << " seconds=" << fmt_double(rec.seconds) << '\n';
    };
}

// ---------------------------------------------------------------- gen

Command add_gen(CLI::App& app) {
    struct Opts {
        fs::path out;
        std::optional<fs::path> config;
        std::optional<int> classes;
        std::optional<int> samples;
        std::optional<std::uint64_t> seed;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("gen", "Generate a synthetic glyph corpus");
    sub->add_option("--out", o->out, "Output dataset directory")->required();
    sub->add_option("--config", o->config, "SynthConfig JSON file")->check(CLI::ExistingFile);
    sub->add_option("--classes", o->classes, "Number of classes (default 44)");
    sub->add_option("--samples", o->samples, "Samples per class (default 102)");
    sub->add_option("--seed", o->seed, "Master seed (default 42)");

    return {"gen", [o] {
                SynthConfig cfg;
                if (o->config) {
                    std::ifstream in(*o->config);
                    std::stringstream ss;
                    ss << in.rdbuf();
                    try {
                        cfg = synth_config_from_json(ss.str());
                    } catch (const std::invalid_argument& e) {
                        throw UsageError(e.what());
                    }
                }
                if (o->classes) cfg.n_classes = *o->classes;
                if (o->samples) cfg.samples_per_class = *o->samples;
                cfg.master_seed = o->seed.value_or(o->config ? cfg.master_seed : kDefaultSeed);
                try {
                    cfg.validate();
                } catch (const std::invalid_argument& e) {
                    throw UsageError(e.what());
                }

                RunManifest man("gen");
                man.config() = json::parse(synth_config_to_json(cfg));
                man.seeds()["master_seed"] = cfg.master_seed;
                if (o->config) man.input("config", *o->config);
                man.output("dataset", o->out);

                const auto ds = gen_corpus(cfg, o->out);
                man.write(o->out / "manifest.json");
                std::cout << "classes=" << ds.classes.size() << " samples=" << ds.samples.size() << '\n';
                return 0;
            }};
}

// ---------------------------------------------------------------- extract

Command add_extract(CLI::App& app) {
    struct Opts {
        fs::path data;
        fs::path out;
        std::optional<fs::path> diagnostics;
        std::string grid = "4x4";
        int canvas = 44;
        std::size_t specks = 4;
        std::optional<int> threshold;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("extract", "Preprocess a dataset and write zoning features");
    sub->add_option("--data", o->data, "Dataset directory")->required();
    sub->add_option("--out", o->out, "Features CSV")->required();
    sub->add_option("--diagnostics", o->diagnostics, "Per-sample diagnostics CSV (default <out>.diagnostics.csv)");
    sub->add_option("--grid", o->grid, "Zoning grid RxC")->capture_default_str();
    sub->add_option("--canvas", o->canvas, "Square canvas size after resize")->capture_default_str();
    sub->add_option("--specks", o->specks, "Largest component area treated as a speck")->capture_default_str();
    sub->add_option("--threshold", o->threshold, "Fixed binarization threshold (default: Otsu)");

    return {"extract", [o] {
                const auto grid = parse_grid(o->grid);
                PreprocessConfig pcfg;
                pcfg.canvas_w = pcfg.canvas_h = o->canvas;
                pcfg.speck_max_area = o->specks;
                if (o->threshold) {
                    if (*o->threshold < 0 || *o->threshold > 255) throw UsageError("--threshold must be in 0..255");
                    pcfg.threshold_override = static_cast<std::uint8_t>(*o->threshold);
                }
                if (o->canvas < grid.rows || o->canvas < grid.cols) throw UsageError("--canvas smaller than --grid");

                RunManifest man("extract");
                man.config()["grid"] = grid.to_string();
                man.config()["canvas"] = o->canvas;
                man.config()["speck_max_area"] = o->specks;
                man.config()["threshold"] = o->threshold ? json(*o->threshold) : json("otsu");
                man.input("data", o->data);

                const auto ds = load_dataset(o->data);
                std::vector<PreprocessDiagnostics> diag;
                const auto table = extract_all(ds, pcfg, grid, &diag);

                write_feature_csv(o->out, table);
                write_classes_tsv(classes_sidecar(o->out), table.classes);
                const auto diag_path = o->diagnostics.value_or(fs::path(o->out.string() + ".diagnostics.csv"));
                {
                    std::ofstream d(diag_path, std::ios::binary | std::ios::trunc);
                    if (!d) throw std::runtime_error(diag_path.string() + ": cannot open for writing");
                    d << "sample_id,threshold,specks_removed,clipped\n";
                    for (std::size_t i = 0; i < diag.size(); ++i) {
                        d << "class_" << ds.samples[i].class_id << '/' << ds.samples[i].sample_id << ','
                          << static_cast<int>(diag[i].threshold) << ',' << diag[i].specks_removed << ','
                          << diag[i].clipped << '\n';
                    }
                }
                man.output("features", o->out);
                man.output("classes", classes_sidecar(o->out));
                man.output("diagnostics", diag_path);
                man.write(manifest_path_for(o->out));
                std::cout << "rows=" << table.rows.size() << " features=" << table.dims() << '\n';
                return 0;
            }};
}

// ---------------------------------------------------------------- eval-knn

Command add_eval_knn(CLI::App& app) {
    struct Opts {
        fs::path features;
        fs::path out;
        std::optional<fs::path> model_out;
        std::string grid;
        std::size_t k = 1;
        double train_frac = 0.667;
        std::uint64_t seed = kDefaultSeed;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("eval-knn", "Split, fit and score the k-NN classifier");
    sub->add_option("--features", o->features, "Features CSV")->required();
    sub->add_option("--out", o->out, "EvalReport JSON")->required();
    sub->add_option("--model-out", o->model_out, "Write the fitted k-NN model here");
    sub->add_option("--grid", o->grid, "Grid of the feature columns (default: inferred)");
    sub->add_option("--k", o->k, "Neighbours")->capture_default_str();
    sub->add_option("--train-frac", o->train_frac, "Training fraction per class")->capture_default_str();
    sub->add_option("--seed", o->seed, "Split seed")->capture_default_str();

    return {"eval-knn", [o] {
                if (o->k < 1) throw UsageError("--k must be >= 1");
                check_fraction(o->train_frac);
                RunManifest man("eval-knn");
                man.config()["k"] = o->k;
                man.config()["train_fraction"] = o->train_frac;
                man.config()["metric"] = KnnModel::metric();
                man.seeds()["split_seed"] = o->seed;
                man.input("features", o->features);

                const auto table = load_features(o->features, o->grid);
                const auto split = stratified_split(table, o->train_frac, o->seed);
                const auto report = evaluate_knn(split, o->k);
                save_report(o->out, report);
                man.output("report", o->out);
                if (o->model_out) {
                    save_knn_model(*o->model_out, knn_fit(split.train));
                    write_classes_tsv(classes_sidecar(*o->model_out), table.classes);
                    man.output("model", *o->model_out);
                }
                man.write(manifest_path_for(o->out));
                std::cout << "accuracy=" << fmt_double(report.overall_accuracy) << '\n';
                return 0;
            }};
}

// ---------------------------------------------------------------- eval-mlp

Command add_eval_mlp(CLI::App& app) {
    struct Opts {
        fs::path features;
        fs::path out;
        std::optional<fs::path> model_out;
        std::optional<fs::path> trace_out;
        std::string grid;
        double train_frac = 0.667;
        std::uint64_t seed = kDefaultSeed;
        int log_every = 50;
        MlpFlags mlp;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("eval-mlp", "Split, train and score the two-hidden-layer MLP");
    sub->add_option("--features", o->features, "Features CSV")->required();
    sub->add_option("--out", o->out, "EvalReport JSON")->required();
    sub->add_option("--model-out", o->model_out, "Write the trained model JSON here");
    sub->add_option("--trace-out", o->trace_out, "Write the per-epoch training trace CSV here");
    sub->add_option("--grid", o->grid, "Grid of the feature columns (default: inferred)");
    sub->add_option("--train-frac", o->train_frac, "Training fraction per class")->capture_default_str();
    sub->add_option("--seed", o->seed, "Split seed; also the default init/shuffle seed")->capture_default_str();
    sub->add_option("--log-every", o->log_every, "Log every N epochs to stderr (0 = quiet)")->capture_default_str();
    o->mlp.add_to(sub);

    return {"eval-mlp", [o] {
                check_fraction(o->train_frac);
                const auto hp = o->mlp.resolve(o->seed);
                RunManifest man("eval-mlp");
                man.config()["train_fraction"] = o->train_frac;
                record_hp(man, hp);
                man.seeds()["split_seed"] = o->seed;
                man.input("features", o->features);

                const auto table = load_features(o->features, o->grid);
                const auto split = stratified_split(table, o->train_frac, o->seed);
                const auto result = evaluate_mlp(split, hp, epoch_logger(o->log_every));

                save_report(o->out, result.report);
                man.output("report", o->out);
                if (o->model_out) {
                    save_mlp_model(*o->model_out, result.model);
                    man.output("model", *o->model_out);
                }
                if (o->trace_out) {
                    write_trace_csv(*o->trace_out, result.trace);
                    man.output("trace", *o->trace_out);
                }
                man.write(manifest_path_for(o->out));
                std::cout << "accuracy=" << fmt_double(result.report.overall_accuracy) << '\n';
                return 0;
            }};
}

// ---------------------------------------------------------------- sweeps

Command add_sweep_k(CLI::App& app) {
    struct Opts {
        fs::path features;
        fs::path out;
        std::string grid;
        std::vector<std::size_t> ks{1, 3, 5, 9, 15};
        double train_frac = 0.667;
        std::uint64_t seed = kDefaultSeed;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("sweep-k", "k-NN accuracy for several k on one split");
    sub->add_option("--features", o->features, "Features CSV")->required();
    sub->add_option("--out", o->out, "SweepCurve CSV")->required();
    sub->add_option("--grid", o->grid, "Grid of the feature columns (default: inferred)");
    sub->add_option("--ks", o->ks, "Comma-separated k values")->delimiter(',')->capture_default_str();
    sub->add_option("--train-frac", o->train_frac, "Training fraction per class")->capture_default_str();
    sub->add_option("--seed", o->seed, "Split seed")->capture_default_str();

    return {"sweep-k", [o] {
                check_fraction(o->train_frac);
                if (o->ks.empty()) throw UsageError("--ks is empty");
                for (std::size_t i = 0; i < o->ks.size(); ++i) {
                    if (o->ks[i] < 1) throw UsageError("--ks values must be >= 1");
                    if (i > 0 && o->ks[i] <= o->ks[i - 1]) throw UsageError("--ks must be strictly increasing");
                }
                RunManifest man("sweep-k");
                man.config()["ks"] = o->ks;
                man.config()["train_fraction"] = o->train_frac;
                man.seeds()["split_seed"] = o->seed;
                man.input("features", o->features);

                const auto table = load_features(o->features, o->grid);
                const auto curve = sweep_k(table, o->ks, o->train_frac, o->seed);
                write_sweep_csv(o->out, curve);
                man.output("curve", o->out);
                man.write(manifest_path_for(o->out));
                for (const auto& p : curve.points)
                    std::cout << "k=" << p.x << " accuracy=" << fmt_double(p.accuracy) << '\n';
                return 0;
            }};
}

Command add_sweep_split(CLI::App& app) {
    struct Opts {
        fs::path features;
        fs::path out_knn;
        fs::path out_mlp;
        std::string grid;
        std::vector<double> fractions = default_split_fractions();
        std::size_t k = 1;
        std::uint64_t seed = kDefaultSeed;
        MlpFlags mlp;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("sweep-split", "k-NN and MLP accuracy/time across train fractions");
    sub->add_option("--features", o->features, "Features CSV")->required();
    sub->add_option("--out-knn", o->out_knn, "k-NN SweepCurve CSV")->required();
    sub->add_option("--out-mlp", o->out_mlp, "MLP SweepCurve CSV")->required();
    sub->add_option("--grid", o->grid, "Grid of the feature columns (default: inferred)");
    sub->add_option("--fractions", o->fractions, "Comma-separated train fractions")->delimiter(',')->capture_default_str();
    sub->add_option("--k", o->k, "Neighbours for the k-NN curve")->capture_default_str();
    sub->add_option("--seed", o->seed, "Split seed; also the default init/shuffle seed")->capture_default_str();
    o->mlp.add_to(sub);

    return {"sweep-split", [o] {
                if (o->fractions.empty()) throw UsageError("--fractions is empty");
                for (std::size_t i = 0; i < o->fractions.size(); ++i) {
                    check_fraction(o->fractions[i]);
                    if (i > 0 && o->fractions[i] <= o->fractions[i - 1])
                        throw UsageError("--fractions must be strictly increasing");
                }
                if (o->k < 1) throw UsageError("--k must be >= 1");
                const auto hp = o->mlp.resolve(o->seed);
                RunManifest man("sweep-split");
                man.config()["fractions"] = o->fractions;
                man.config()["k"] = o->k;
                record_hp(man, hp);
                man.seeds()["split_seed"] = o->seed;
                man.input("features", o->features);

                const auto table = load_features(o->features, o->grid);
                const auto sweep = sweep_split(table, o->fractions, hp, o->k, o->seed);
                write_sweep_csv(o->out_knn, sweep.knn);
                write_sweep_csv(o->out_mlp, sweep.mlp);
                man.output("knn_curve", o->out_knn);
                man.output("mlp_curve", o->out_mlp);
                man.write(manifest_path_for(o->out_mlp));
                for (std::size_t i = 0; i < sweep.mlp.points.size(); ++i) {
                    std::cout << "fraction=" << fmt_double(sweep.mlp.points[i].x)
                              << " knn_accuracy=" << fmt_double(sweep.knn.points[i].accuracy)
                              << " mlp_accuracy=" << fmt_double(sweep.mlp.points[i].accuracy)
                              << " mlp_seconds=" << fmt_double(sweep.mlp.points[i].seconds) << '\n';
                }
                return 0;
            }};
}

Command add_sweep_epochs(CLI::App& app) {
    struct Opts {
        fs::path features;
        fs::path out;
        std::string grid;
        std::vector<int> epoch_list{10, 100, 500};
        double train_frac = 0.667;
        std::uint64_t seed = kDefaultSeed;
        MlpFlags mlp;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("sweep-epochs", "MLP test accuracy snapshots along one training run");
    sub->add_option("--features", o->features, "Features CSV")->required();
    sub->add_option("--out", o->out, "SweepCurve CSV")->required();
    sub->add_option("--grid", o->grid, "Grid of the feature columns (default: inferred)");
    sub->add_option("--epoch-list", o->epoch_list, "Comma-separated epochs to snapshot")->delimiter(',')->capture_default_str();
    sub->add_option("--train-frac", o->train_frac, "Training fraction per class")->capture_default_str();
    sub->add_option("--seed", o->seed, "Split seed; also the default init/shuffle seed")->capture_default_str();
    o->mlp.add_to(sub);

    return {"sweep-epochs", [o] {
                check_fraction(o->train_frac);
                if (o->epoch_list.empty()) throw UsageError("--epoch-list is empty");
                for (std::size_t i = 0; i < o->epoch_list.size(); ++i) {
                    if (o->epoch_list[i] < 1) throw UsageError("--epoch-list values must be >= 1");
                    if (i > 0 && o->epoch_list[i] <= o->epoch_list[i - 1])
                        throw UsageError("--epoch-list must be strictly increasing");
                }
                auto hp = o->mlp.resolve(o->seed);
                hp.epochs = o->epoch_list.back();
                RunManifest man("sweep-epochs");
                man.config()["epoch_list"] = o->epoch_list;
                man.config()["train_fraction"] = o->train_frac;
                record_hp(man, hp);
                man.seeds()["split_seed"] = o->seed;
                man.input("features", o->features);

                const auto table = load_features(o->features, o->grid);
                const auto curve = sweep_epochs(table, o->epoch_list, hp, o->train_frac, o->seed);
                write_sweep_csv(o->out, curve);
                man.output("curve", o->out);
                man.write(manifest_path_for(o->out));
                for (const auto& p : curve.points)
                    std::cout << "epoch=" << p.x << " accuracy=" << fmt_double(p.accuracy) << '\n';
                return 0;
            }};
}

// ---------------------------------------------------------------- predict

Command add_predict(CLI::App& app) {
    struct Opts {
        fs::path model;
        fs::path image;
        std::string grid;
        int canvas = 44;
        std::size_t specks = 4;
        std::size_t k = 1;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("predict", "Classify one PGM image with a saved MLP or k-NN model");
    sub->add_option("--model", o->model, "Model file (MLP JSON or k-NN model)")->required();
    sub->add_option("--image", o->image, "PGM image")->required();
    sub->add_option("--grid", o->grid, "Zoning grid for k-NN models (default: inferred)");
    sub->add_option("--canvas", o->canvas, "Square canvas size after resize")->capture_default_str();
    sub->add_option("--specks", o->specks, "Largest component area treated as a speck")->capture_default_str();
    sub->add_option("--k", o->k, "Neighbours for k-NN models")->capture_default_str();

    return {"predict", [o] {
                if (o->k < 1) throw UsageError("--k must be >= 1");
                if (o->canvas < 1) throw UsageError("--canvas must be >= 1");
                std::ifstream probe(o->model, std::ios::binary);
                if (!probe) throw std::runtime_error(o->model.string() + ": cannot open model");
                char first = 0;
                probe >> first;
                probe.close();

                PreprocessConfig pcfg;
                pcfg.canvas_w = pcfg.canvas_h = o->canvas;
                pcfg.speck_max_area = o->specks;
                const auto image = read_pgm_file(o->image);
                const auto pre = preprocess_pipeline(image, pcfg);

                ClassId id = 0;
                std::string name;
                if (first == '{') {
                    const auto model = load_mlp_model(o->model);
                    const auto features = zone_densities(pre.image, model.feature_grid);
                    id = mlp_predict(model, features);
                    name = model.classes.at(static_cast<std::size_t>(id)).name;
                } else {
                    const auto model = load_knn_model(o->model, read_sidecar(o->model));
                    auto grid = model.table().grid;
                    if (!o->grid.empty()) grid = parse_grid(o->grid);
                    if (static_cast<std::size_t>(grid.zones()) != model.table().dims())
                        throw std::runtime_error("--grid " + grid.to_string() + " does not match model feature count");
                    const auto features = zone_densities(pre.image, grid);
                    id = knn_predict(model, features, o->k).class_id;
                    const auto& classes = model.table().classes;
                    name = static_cast<std::size_t>(id) < classes.size() ? classes[static_cast<std::size_t>(id)].name
                                                                          : "class_" + std::to_string(id);
                }
                std::cout << "class_id=" << id << " class_name=" << name << '\n';
                return 0;
            }};
}

}  // namespace

std::vector<Command> register_commands(CLI::App& app) {
    return {add_gen(app),     add_extract(app),     add_eval_knn(app),     add_eval_mlp(app),
            add_sweep_k(app), add_sweep_split(app), add_sweep_epochs(app), add_predict(app)};
}

}  // namespace zocr::cli
