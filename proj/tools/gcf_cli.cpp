#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gcf/bytes.hpp"
#include "gcf/checkpoint.hpp"
#include "gcf/complexity.hpp"
#include "gcf/descriptor_io.hpp"
#include "gcf/error.hpp"
#include "gcf/experiment.hpp"
#include "gcf/gradcheck.hpp"
#include "gcf/inference.hpp"
#include "gcf/loss.hpp"
#include "gcf/synth.hpp"
#include "gcf/train.hpp"

namespace {

using nlohmann::json;
using namespace gcf;

// Thrown when a check the CLI gates on (gradcheck tolerance) fails; mapped
// to exit code 3 as opposed to 2 for validation errors.
struct GateFailure {};

std::string g_command;  // the invocation, recorded into manifests

std::string error_record(const std::string& category, const std::string& message) {
    return json{{"error", json{{"category", category}, {"message", message}}}}.dump();
}

// --- config file ----------------------------------------------------------------
//
// One JSON file with optional sections model/sgd/loss/train/synth. Every key
// maps 1:1 onto a library config field; unknown sections or keys are errors.
// CLI flags override file values, which override built-in defaults.

struct Settings {
    GcfConfig model;
    SgdConfig sgd;
    LossConfig loss;
    TrainOptions train;
    SynthConfig synth;
};

struct ConfigPresence {
    bool model_C = false;
    bool model_d = false;
};

std::size_t get_count(const json& v, const std::string& key) {
    require(v.is_number_integer() && v.get<std::int64_t>() >= 0, "invalid_config",
            "config key " + key + " must be a non-negative integer");
    return static_cast<std::size_t>(v.get<std::int64_t>());
}

double get_real(const json& v, const std::string& key) {
    require(v.is_number(), "invalid_config", "config key " + key + " must be a number");
    return v.get<double>();
}

std::string get_str(const json& v, const std::string& key) {
    require(v.is_string(), "invalid_config", "config key " + key + " must be a string");
    return v.get<std::string>();
}

bool get_bool(const json& v, const std::string& key) {
    require(v.is_boolean(), "invalid_config", "config key " + key + " must be a boolean");
    return v.get<bool>();
}

void apply_model(const json& sec, GcfConfig& m, ConfigPresence* seen) {
    for (const auto& [key, value] : sec.items()) {
        if (key == "C") {
            m.C = get_count(value, "model.C");
            if (seen) seen->model_C = true;
        } else if (key == "d") {
            m.d = get_count(value, "model.d");
            if (seen) seen->model_d = true;
        } else if (key == "D") {
            m.D = get_count(value, "model.D");
        } else if (key == "K") {
            m.K = get_count(value, "model.K");
        } else if (key == "n") {
            m.n = get_count(value, "model.n");
        } else if (key == "h") {
            m.h = get_count(value, "model.h");
        } else if (key == "mode") {
            m.mode = mode_from_string(get_str(value, "model.mode"));
        } else if (key == "normalization") {
            m.normalization =
                score_normalization_from_string(get_str(value, "model.normalization"));
        } else if (key == "with_bias") {
            m.with_bias = get_bool(value, "model.with_bias");
        } else {
            throw GcfError("invalid_config", "unknown config key model." + key);
        }
    }
}

void apply_sgd(const json& sec, SgdConfig& s) {
    for (const auto& [key, value] : sec.items()) {
        if (key == "lr") {
            s.lr = get_real(value, "sgd.lr");
        } else if (key == "momentum") {
            s.momentum = get_real(value, "sgd.momentum");
        } else if (key == "dampening") {
            s.dampening = get_real(value, "sgd.dampening");
        } else if (key == "weight_decay") {
            s.weight_decay = get_real(value, "sgd.weight_decay");
        } else if (key == "batch_size") {
            s.batch_size = get_count(value, "sgd.batch_size");
        } else if (key == "lr_reductions") {
            s.lr_reductions = get_count(value, "sgd.lr_reductions");
        } else if (key == "lr_factor") {
            s.lr_factor = get_real(value, "sgd.lr_factor");
        } else if (key == "plateau_patience") {
            s.plateau_patience = get_count(value, "sgd.plateau_patience");
        } else {
            throw GcfError("invalid_config", "unknown config key sgd." + key);
        }
    }
}

void apply_loss(const json& sec, LossConfig& l) {
    for (const auto& [key, value] : sec.items()) {
        if (key == "lambda") {
            l.lambda = get_real(value, "loss.lambda");
        } else {
            throw GcfError("invalid_config", "unknown config key loss." + key);
        }
    }
}

void apply_train(const json& sec, TrainOptions& t) {
    for (const auto& [key, value] : sec.items()) {
        if (key == "max_epochs") {
            t.max_epochs = get_count(value, "train.max_epochs");
        } else if (key == "min_delta") {
            t.min_delta = get_real(value, "train.min_delta");
        } else if (key == "workers") {
            t.workers = get_count(value, "train.workers");
        } else {
            throw GcfError("invalid_config", "unknown config key train." + key);
        }
    }
}

void apply_synth(const json& sec, SynthConfig& s) {
    for (const auto& [key, value] : sec.items()) {
        if (key == "num_classes") {
            s.num_classes = get_count(value, "synth.num_classes");
        } else if (key == "clips_per_video") {
            s.clips_per_video = get_count(value, "synth.clips_per_video");
        } else if (key == "descriptor_dim") {
            s.descriptor_dim = get_count(value, "synth.descriptor_dim");
        } else if (key == "relevant_run_length") {
            s.relevant_run_length = get_count(value, "synth.relevant_run_length");
        } else if (key == "prototype_noise_sigma") {
            s.prototype_noise_sigma = get_real(value, "synth.prototype_noise_sigma");
        } else if (key == "background_mode") {
            s.background_mode =
                background_mode_from_string(get_str(value, "synth.background_mode"));
        } else if (key == "distractor_probability") {
            s.distractor_probability = get_real(value, "synth.distractor_probability");
        } else if (key == "train_size") {
            s.train_size = get_count(value, "synth.train_size");
        } else if (key == "val_size") {
            s.val_size = get_count(value, "synth.val_size");
        } else if (key == "test_size") {
            s.test_size = get_count(value, "synth.test_size");
        } else if (key == "seed") {
            s.seed = get_count(value, "synth.seed");
        } else {
            throw GcfError("invalid_config", "unknown config key synth." + key);
        }
    }
}

void apply_config_file(const std::string& path, Settings& s, ConfigPresence* seen = nullptr) {
    const std::string text = bytes::read_file(path);
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw GcfError("invalid_config",
                       "config file " + path + " is not valid JSON: " + e.what());
    }
    require(root.is_object(), "invalid_config", "config file root must be a JSON object");
    for (const auto& [key, value] : root.items()) {
        require(value.is_object(), "invalid_config",
                "config section " + key + " must be a JSON object");
        if (key == "model") {
            apply_model(value, s.model, seen);
        } else if (key == "sgd") {
            apply_sgd(value, s.sgd);
        } else if (key == "loss") {
            apply_loss(value, s.loss);
        } else if (key == "train") {
            apply_train(value, s.train);
        } else if (key == "synth") {
            apply_synth(value, s.synth);
        } else {
            throw GcfError("invalid_config", "unknown config section " + key);
        }
    }
}

json model_to_json(const GcfConfig& m) {
    return json{{"C", m.C},           {"d", m.d},
                {"D", m.D},           {"K", m.K},
                {"n", m.n},           {"h", m.h},
                {"mode", to_string(m.mode)},
                {"normalization", to_string(m.normalization)},
                {"with_bias", m.with_bias}};
}

json sgd_to_json(const SgdConfig& s) {
    return json{{"lr", s.lr},
                {"momentum", s.momentum},
                {"dampening", s.dampening},
                {"weight_decay", s.weight_decay},
                {"batch_size", s.batch_size},
                {"lr_reductions", s.lr_reductions},
                {"lr_factor", s.lr_factor},
                {"plateau_patience", s.plateau_patience}};
}

json train_to_json(const TrainOptions& t) {
    return json{{"max_epochs", t.max_epochs}, {"min_delta", t.min_delta}, {"workers", t.workers}};
}

json synth_to_json(const SynthConfig& s) {
    return json{{"num_classes", s.num_classes},
                {"clips_per_video", s.clips_per_video},
                {"descriptor_dim", s.descriptor_dim},
                {"relevant_run_length", s.relevant_run_length},
                {"prototype_noise_sigma", s.prototype_noise_sigma},
                {"background_mode", to_string(s.background_mode)},
                {"distractor_probability", s.distractor_probability},
                {"train_size", s.train_size},
                {"val_size", s.val_size},
                {"test_size", s.test_size},
                {"seed", s.seed}};
}

// --- shared helpers ---------------------------------------------------------------

std::size_t argmax(const Vector& y) {
    return static_cast<std::size_t>(
        std::distance(y.begin(), std::max_element(y.begin(), y.end())));
}

OutputRecord record_output(const std::string& dir, const std::string& name) {
    const std::string data = bytes::read_file(dir + "/" + name);
    return OutputRecord{name, data.size(), bytes::fnv1a64(data)};
}

// C, d, and the largest label over a split; insists on uniform shapes.
void scan_videos(const std::vector<SyntheticVideo>& vs, const std::string& split, std::size_t& C,
                 std::size_t& d, std::size_t& max_label) {
    for (std::size_t i = 0; i < vs.size(); ++i) {
        const SyntheticVideo& v = vs[i];
        if (C == 0) {
            C = v.descriptors.clip_count();
            d = v.descriptors.dim();
        }
        require(v.descriptors.clip_count() == C && v.descriptors.dim() == d, "shape_mismatch",
                "training needs uniformly shaped videos: " + split + " video " +
                    std::to_string(i) + " is " + std::to_string(v.descriptors.clip_count()) + "x" +
                    std::to_string(v.descriptors.dim()) + ", expected " + std::to_string(C) + "x" +
                    std::to_string(d));
        max_label = std::max(max_label, v.label);
    }
}

// Brings a video to exactly C clips: loop-pads short ones, truncates long
// ones only when allowed.
ClipDescriptorSet fit_clip_count(const ClipDescriptorSet& clips, std::size_t C, bool truncate) {
    if (clips.clip_count() == C) return clips;
    if (clips.clip_count() < C) return pad_clips(clips, C);
    require(truncate, "shape_mismatch",
            "video has " + std::to_string(clips.clip_count()) + " clips but the model expects " +
                std::to_string(C) + "; pass --truncate to keep the first " + std::to_string(C));
    return truncate_clips(clips, C);
}

Vector flatten_params(const GcfParams& p) {
    Vector out;
    p.for_each_tensor([&](const std::string&, const Matrix& m) {
        out.insert(out.end(), m.values().begin(), m.values().end());
    });
    return out;
}

void unflatten_params(const Vector& v, GcfParams& p) {
    std::size_t off = 0;
    p.for_each_tensor([&](const std::string&, Matrix& m) {
        std::copy_n(v.data() + off, m.size(), m.values().data());
        off += m.size();
    });
}

void emit_lines(const std::vector<std::string>& lines, const std::string& out_path) {
    for (const std::string& line : lines) std::cout << line << "\n";
    if (!out_path.empty()) {
        std::string all;
        for (const std::string& line : lines) {
            all += line;
            all += '\n';
        }
        bytes::write_file(out_path, all);
    }
}

// --- synth ------------------------------------------------------------------------

struct SynthCli {
    std::string out, config_path;
    bool bench = false;
    std::uint64_t seed = 1;
    std::size_t classes = 0, clips = 0, dim = 0, run_length = 0;
    std::size_t train_n = 0, val_n = 0, test_n = 0;
    double sigma = 0.0, distractor_prob = 0.0;
    std::string background;
};

void run_synth(const SynthCli& o, const CLI::App& cmd) {
    Settings s;
    if (o.bench) s.synth = bench_s(1);
    if (!o.config_path.empty()) apply_config_file(o.config_path, s);
    auto ov = [&cmd](const char* flag, auto& dst, const auto& src) {
        if (cmd.count(flag)) dst = src;
    };
    ov("--seed", s.synth.seed, o.seed);
    ov("--classes", s.synth.num_classes, o.classes);
    ov("--clips", s.synth.clips_per_video, o.clips);
    ov("--dim", s.synth.descriptor_dim, o.dim);
    ov("--run-length", s.synth.relevant_run_length, o.run_length);
    ov("--sigma", s.synth.prototype_noise_sigma, o.sigma);
    ov("--distractor-prob", s.synth.distractor_probability, o.distractor_prob);
    ov("--train", s.synth.train_size, o.train_n);
    ov("--val", s.synth.val_size, o.val_n);
    ov("--test", s.synth.test_size, o.test_n);
    if (cmd.count("--background"))
        s.synth.background_mode = background_mode_from_string(o.background);
    s.synth.validate();

    DatasetSplits splits = generate_synthetic(s.synth);
    save_dataset(o.out, splits, s.synth, g_command);
    const std::string manifest = bytes::read_file(o.out + "/dataset.json");
    std::cout << "dataset: " << splits.train.size() << " train / " << splits.val.size()
              << " val / " << splits.test.size() << " test videos (K=" << s.synth.num_classes
              << " C=" << s.synth.clips_per_video << " d=" << s.synth.descriptor_dim
              << " seed=" << s.synth.seed << ") -> " << o.out << "\n";
    std::cout << "manifest checksum " << checksum_hex(bytes::fnv1a64(manifest)) << "\n";
}

void setup_synth(CLI::App& app) {
    auto o = std::make_shared<SynthCli>();
    CLI::App* cmd = app.add_subcommand("synth", "Generate a relevance-structured synthetic dataset");
    cmd->add_option("--out", o->out, "Dataset directory to create")->required();
    cmd->add_option("--config", o->config_path, "JSON config file (synth section)");
    cmd->add_flag("--bench-s", o->bench,
                  "Start from the bench-s preset (K=20 C=10 d=64, 5000/500/1000)");
    cmd->add_option("--seed", o->seed, "Generator seed (default 1)");
    cmd->add_option("--classes", o->classes, "Number of classes");
    cmd->add_option("--clips", o->clips, "Clips per video");
    cmd->add_option("--dim", o->dim, "Descriptor dimension");
    cmd->add_option("--run-length", o->run_length, "Length of the relevant clip run");
    cmd->add_option("--sigma", o->sigma, "Prototype noise sigma");
    cmd->add_option("--background", o->background,
                    "Background mode: pure_noise or distractor_prototypes");
    cmd->add_option("--distractor-prob", o->distractor_prob,
                    "Distractor probability for off-run clips");
    cmd->add_option("--train", o->train_n, "Training split size");
    cmd->add_option("--val", o->val_n, "Validation split size");
    cmd->add_option("--test", o->test_n, "Test split size");
    cmd->callback([o, cmd]() { run_synth(*o, *cmd); });
}

// --- train ------------------------------------------------------------------------

struct TrainCli {
    std::string data, out, config_path, resume, model = "gcf";
    std::uint64_t seed = 1;
    std::size_t epochs = 0, D = 0, n = 0, h = 0, K = 0;
    std::string mode, normalization;
    bool with_bias = false, quiet = false;
    double lr = 0.0, momentum = 0.0, dampening = 0.0, weight_decay = 0.0;
    double lr_factor = 0.0, min_delta = 0.0, lambda = 0.0;
    std::size_t batch_size = 0, lr_reductions = 0, patience = 0, workers = 0;
};

void print_epoch(const EpochRecord& r) {
    std::ostringstream line;
    line << "epoch " << std::setw(4) << r.epoch << "  lr " << std::setprecision(6) << r.lr
         << std::fixed << std::setprecision(4) << "  train " << r.train_loss << "/"
         << r.train_accuracy << "  val " << r.val_loss << "/" << r.val_accuracy;
    std::cout << line.str() << "\n";
}

void write_train_manifest(const std::string& out_dir, const json& effective, std::uint64_t seed) {
    std::vector<OutputRecord> outputs{record_output(out_dir, "model.gcfc"),
                                      record_output(out_dir, "history.jsonl")};
    write_manifest(out_dir + "/manifest.json", g_command, effective.dump(), seed, outputs);
}

void run_train(const TrainCli& o, const CLI::App& cmd) {
    require(o.model == "gcf" || o.model == "clip", "invalid_argument",
            "--model must be gcf or clip, got " + o.model);

    Settings s;
    ConfigPresence seen;
    if (!o.config_path.empty()) apply_config_file(o.config_path, s, &seen);
    auto ov = [&cmd](const char* flag, auto& dst, const auto& src) {
        if (cmd.count(flag)) dst = src;
    };
    ov("--D", s.model.D, o.D);
    ov("--n", s.model.n, o.n);
    ov("--hidden", s.model.h, o.h);
    ov("--K", s.model.K, o.K);
    if (cmd.count("--mode")) s.model.mode = mode_from_string(o.mode);
    if (cmd.count("--normalization"))
        s.model.normalization = score_normalization_from_string(o.normalization);
    if (cmd.count("--with-bias")) s.model.with_bias = o.with_bias;
    ov("--lr", s.sgd.lr, o.lr);
    ov("--momentum", s.sgd.momentum, o.momentum);
    ov("--dampening", s.sgd.dampening, o.dampening);
    ov("--weight-decay", s.sgd.weight_decay, o.weight_decay);
    ov("--batch-size", s.sgd.batch_size, o.batch_size);
    ov("--lr-reductions", s.sgd.lr_reductions, o.lr_reductions);
    ov("--lr-factor", s.sgd.lr_factor, o.lr_factor);
    ov("--patience", s.sgd.plateau_patience, o.patience);
    ov("--lambda", s.loss.lambda, o.lambda);
    ov("--epochs", s.train.max_epochs, o.epochs);
    ov("--min-delta", s.train.min_delta, o.min_delta);
    ov("--workers", s.train.workers, o.workers);

    DatasetSplits splits = load_dataset(o.data);
    std::size_t C = 0, d = 0, max_label = 0;
    scan_videos(splits.train, "train", C, d, max_label);
    scan_videos(splits.val, "val", C, d, max_label);
    require(!splits.train.empty(), "empty_input", "dataset has no training videos");
    const std::size_t derived_K = max_label + 1;

    if (seen.model_C)
        require(s.model.C == C, "config_mismatch",
                "config says C=" + std::to_string(s.model.C) + " but the dataset has C=" +
                    std::to_string(C));
    if (seen.model_d)
        require(s.model.d == d, "config_mismatch",
                "config says d=" + std::to_string(s.model.d) + " but the dataset has d=" +
                    std::to_string(d));
    s.model.C = C;
    s.model.d = d;
    if (cmd.count("--K") || s.model.K != GcfConfig{}.K) {
        require(s.model.K >= derived_K, "invalid_config",
                "K=" + std::to_string(s.model.K) + " but the dataset carries labels up to " +
                    std::to_string(max_label));
    } else {
        s.model.K = derived_K;
    }
    s.train.validate();

    std::filesystem::create_directories(o.out);
    const std::string history_path = o.out + "/history.jsonl";
    s.train.on_epoch = [&](const EpochRecord& r) {
        append_history(history_path, {r});
        if (!o.quiet) print_epoch(r);
    };

    if (o.model == "clip") {
        require(o.resume.empty(), "invalid_argument", "--resume supports only the gcf model");
        ClipCheckpoint ckpt;
        ckpt.sgd = s.sgd;
        ckpt.clf.W = Matrix(s.model.K, d);
        auto records =
            train_clip_classifier(splits.train, splits.val, ckpt.clf, s.sgd, s.train, o.seed);
        ckpt.epochs_done = records.size();
        write_clip_checkpoint(ckpt, o.out + "/model.gcfc");
        json effective{{"model", json{{"type", "clip_classifier"}, {"K", s.model.K}, {"d", d}}},
                       {"sgd", sgd_to_json(s.sgd)},
                       {"train", train_to_json(s.train)}};
        write_train_manifest(o.out, effective, o.seed);
        require(!records.empty(), "validation", "training ran zero epochs");
        const EpochRecord& last = records.back();
        std::cout << "clip classifier: " << records.size() << " epoch(s), val " << std::fixed
                  << std::setprecision(4) << last.val_loss << "/" << last.val_accuracy << " -> "
                  << o.out << "/model.gcfc" << "\n";
        return;
    }

    Checkpoint ckpt;
    if (!o.resume.empty()) {
        static const char* locked[] = {"--D",          "--n",          "--hidden",
                                       "--K",          "--mode",       "--normalization",
                                       "--with-bias",  "--lr",         "--momentum",
                                       "--dampening",  "--weight-decay", "--batch-size",
                                       "--lr-reductions", "--lr-factor", "--patience",
                                       "--lambda",     "--seed"};
        for (const char* flag : locked)
            require(cmd.count(flag) == 0, "invalid_argument",
                    std::string(flag) + " cannot be combined with --resume (the checkpoint "
                                        "fixes the model and recipe)");
        ckpt = read_checkpoint(o.resume);
        require(ckpt.config.C == C && ckpt.config.d == d, "config_mismatch",
                "checkpoint was trained on C=" + std::to_string(ckpt.config.C) + " d=" +
                    std::to_string(ckpt.config.d) + " videos but the dataset has C=" +
                    std::to_string(C) + " d=" + std::to_string(d));
        require(ckpt.config.K >= derived_K, "config_mismatch",
                "checkpoint has K=" + std::to_string(ckpt.config.K) +
                    " but the dataset carries labels up to " + std::to_string(max_label));
    } else {
        s.model.validate();
        s.sgd.validate();
        s.loss.validate();
        ckpt.config = s.model;
        ckpt.sgd = s.sgd;
        ckpt.loss = s.loss;
        Rng param_rng = Rng(o.seed).split("params");
        ckpt.params = GcfParams::init(ckpt.config, param_rng);
        ckpt.state = TrainerState::init(ckpt.params, ckpt.sgd, o.seed);
    }

    auto records = train_gcf(splits.train, splits.val, ckpt.params, ckpt.state, ckpt.sgd,
                             ckpt.loss, s.train);
    write_checkpoint(ckpt, o.out + "/model.gcfc");
    json effective{{"model", model_to_json(ckpt.config)},
                   {"sgd", sgd_to_json(ckpt.sgd)},
                   {"loss", json{{"lambda", ckpt.loss.lambda}}},
                   {"train", train_to_json(s.train)}};
    write_train_manifest(o.out, effective, o.seed);

    std::cout << "gcf[" << to_string(ckpt.config.mode) << "]: " << records.size()
              << " epoch(s) this run, " << ckpt.state.epochs_done << " total";
    if (!records.empty()) {
        const EpochRecord& last = records.back();
        std::cout << ", val " << std::fixed << std::setprecision(4) << last.val_loss << "/"
                  << last.val_accuracy;
    }
    if (ckpt.state.schedule.stopped) std::cout << ", schedule stopped";
    std::cout << " -> " << o.out << "/model.gcfc" << "\n";
}

void setup_train(CLI::App& app) {
    auto o = std::make_shared<TrainCli>();
    CLI::App* cmd = app.add_subcommand("train", "Train the fusion head or the clip baseline");
    cmd->add_option("--data", o->data, "Dataset directory from `synth`")->required();
    cmd->add_option("--out", o->out, "Run directory for checkpoint/history/manifest")->required();
    cmd->add_option("--config", o->config_path, "JSON config file");
    cmd->add_option("--model", o->model, "What to train: gcf (default) or clip");
    cmd->add_option("--resume", o->resume, "Checkpoint to continue from (gcf only)");
    cmd->add_option("--seed", o->seed, "Parameter init + shuffle seed (default 1)");
    cmd->add_option("--epochs", o->epochs, "Total epoch budget (resume counts prior epochs)");
    cmd->add_option("--D", o->D, "Fused descriptor width");
    cmd->add_option("--n", o->n, "Number of stacked fusion layers");
    cmd->add_option("--hidden", o->h, "Gating hidden width (0 = clip count)");
    cmd->add_option("--K", o->K, "Class count (default: derived from labels)");
    cmd->add_option("--mode", o->mode, "full, inter_clip_only, or clip_wise_only");
    cmd->add_option("--normalization", o->normalization, "Fusion score norm: softmax or divisor");
    cmd->add_flag("--with-bias", o->with_bias, "Enable bias terms");
    cmd->add_option("--lr", o->lr, "Initial learning rate");
    cmd->add_option("--momentum", o->momentum, "SGD momentum");
    cmd->add_option("--dampening", o->dampening, "SGD dampening");
    cmd->add_option("--weight-decay", o->weight_decay, "L2 weight decay");
    cmd->add_option("--batch-size", o->batch_size, "Mini-batch size");
    cmd->add_option("--lr-reductions", o->lr_reductions, "Plateau LR reductions before stopping");
    cmd->add_option("--lr-factor", o->lr_factor, "LR multiplier per reduction");
    cmd->add_option("--patience", o->patience, "Plateau patience in epochs");
    cmd->add_option("--lambda", o->lambda, "Sparsity trade-off on the gate");
    cmd->add_option("--min-delta", o->min_delta, "Minimum val-loss improvement");
    cmd->add_option("--workers", o->workers, "Per-batch gradient workers (output-invariant)");
    cmd->add_flag("--quiet", o->quiet, "Suppress per-epoch progress lines");
    cmd->callback([o, cmd]() { run_train(*o, *cmd); });
}

// --- eval -------------------------------------------------------------------------

struct EvalCli {
    std::string data, split = "test", model, baseline;
    std::size_t central_k = 1;
    bool as_json = false;
};

void run_eval(const EvalCli& o) {
    std::vector<SyntheticVideo> videos = load_split(o.data, o.split);
    require(!videos.empty(), "empty_input", "split " + o.split + " is empty");
    require(checkpoint_kind(o.model) == "gcf_head", "config_mismatch",
            "--model expects a gcf_head checkpoint; " + o.model + " holds a " +
                checkpoint_kind(o.model));
    Checkpoint ckpt = read_checkpoint(o.model);

    if (!o.baseline.empty()) {
        ClipCheckpoint clip = read_clip_checkpoint(o.baseline);
        require(clip.clf.W.cols() == ckpt.config.d && clip.clf.W.rows() == ckpt.config.K,
                "config_mismatch",
                "baseline is " + std::to_string(clip.clf.W.rows()) + "x" +
                    std::to_string(clip.clf.W.cols()) + " but the model expects K=" +
                    std::to_string(ckpt.config.K) + " d=" + std::to_string(ckpt.config.d));
        StrategyReport rep = evaluate_strategies(videos, clip.clf, ckpt.params, o.central_k);
        if (o.as_json) {
            std::cout << json{{"split", o.split},
                              {"videos", videos.size()},
                              {"central_k", o.central_k},
                              {"central_top1", rep.central_top1},
                              {"dense_top1", rep.dense_top1},
                              {"gcf_top1", rep.gcf_top1},
                              {"mode", to_string(ckpt.config.mode)}}
                             .dump()
                      << "\n";
            return;
        }
        std::cout << "split=" << o.split << " videos=" << videos.size()
                  << " central_k=" << o.central_k << "\n";
        std::cout << std::fixed << std::setprecision(4);
        auto row = [](const std::string& name, double v) {
            std::cout << std::left << std::setw(22) << name << std::right << v << "\n";
        };
        std::cout << std::left << std::setw(22) << "strategy" << "top-1\n";
        row("central@" + std::to_string(o.central_k), rep.central_top1);
        row("dense", rep.dense_top1);
        row("gcf[" + to_string(ckpt.config.mode) + "]", rep.gcf_top1);
        return;
    }

    std::vector<Vector> preds;
    std::vector<std::size_t> labels;
    for (const SyntheticVideo& v : videos) {
        ClipDescriptorSet clips = fit_clip_count(v.descriptors, ckpt.config.C, false);
        preds.push_back(gcf_predict(clips, ckpt.params).y);
        labels.push_back(v.label);
    }
    const double top1 = top1_accuracy(preds, labels);
    if (o.as_json) {
        std::cout << json{{"split", o.split},
                          {"videos", videos.size()},
                          {"gcf_top1", top1},
                          {"mode", to_string(ckpt.config.mode)}}
                         .dump()
                  << "\n";
        return;
    }
    std::cout << "split=" << o.split << " videos=" << videos.size() << "\n";
    std::cout << std::fixed << std::setprecision(4);
    std::cout << std::left << std::setw(22) << "strategy" << "top-1\n";
    std::cout << std::left << std::setw(22) << ("gcf[" + to_string(ckpt.config.mode) + "]")
              << std::right << top1 << "\n";
}

void setup_eval(CLI::App& app) {
    auto o = std::make_shared<EvalCli>();
    CLI::App* cmd =
        app.add_subcommand("eval", "Compare central/dense/gcf top-1 accuracy on a split");
    cmd->add_option("--data", o->data, "Dataset directory")->required();
    cmd->add_option("--split", o->split, "train, val, or test (default test)");
    cmd->add_option("--model", o->model, "gcf checkpoint (.gcfc)")->required();
    cmd->add_option("--baseline", o->baseline,
                    "Clip-classifier checkpoint enabling the central/dense rows");
    cmd->add_option("--central-k", o->central_k, "Width of the central-clip window (default 1)");
    cmd->add_flag("--json", o->as_json, "Emit one JSON object instead of the table");
    cmd->callback([o]() { run_eval(*o); });
}

// --- predict ----------------------------------------------------------------------

struct PredictCli {
    std::string model, input, data, split = "test", out;
    bool truncate = false;
    std::size_t limit = 0;
};

// Videos plus their labels (-1 when unlabeled) from either --input or --data.
std::vector<std::pair<ClipDescriptorSet, std::int64_t>> gather_inputs(const std::string& input,
                                                                      const std::string& data,
                                                                      const std::string& split) {
    require(input.empty() != data.empty(), "invalid_argument",
            "exactly one of --input and --data is required");
    std::vector<std::pair<ClipDescriptorSet, std::int64_t>> out;
    if (!input.empty()) {
        DescriptorRecord rec = read_descriptor_file(input);
        out.emplace_back(rec.descriptors, rec.label);
    } else {
        for (SyntheticVideo& v : load_split(data, split))
            out.emplace_back(std::move(v.descriptors), static_cast<std::int64_t>(v.label));
    }
    return out;
}

void run_predict(const PredictCli& o) {
    auto inputs = gather_inputs(o.input, o.data, o.split);
    if (o.limit > 0 && inputs.size() > o.limit) inputs.resize(o.limit);

    std::vector<std::string> lines;
    const std::string kind = checkpoint_kind(o.model);
    if (kind == "clip_classifier") {
        ClipCheckpoint ckpt = read_clip_checkpoint(o.model);
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            Vector y = dense_clips_predict(inputs[i].first, ckpt.clf);
            const std::size_t k = argmax(y);
            json line{{"index", i}, {"predicted", k}, {"probability", y[k]}};
            if (inputs[i].second >= 0) line["label"] = inputs[i].second;
            lines.push_back(line.dump());
        }
    } else {
        Checkpoint ckpt = read_checkpoint(o.model);
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            ClipDescriptorSet clips = fit_clip_count(inputs[i].first, ckpt.config.C, o.truncate);
            GcfPrediction pred = gcf_predict(clips, ckpt.params);
            const std::size_t k = argmax(pred.y);
            json line{{"index", i}, {"predicted", k}, {"probability", pred.y[k]}};
            if (inputs[i].second >= 0) line["label"] = inputs[i].second;
            lines.push_back(line.dump());
        }
    }
    emit_lines(lines, o.out);
}

void setup_predict(CLI::App& app) {
    auto o = std::make_shared<PredictCli>();
    CLI::App* cmd = app.add_subcommand(
        "predict", "Per-video class and probability, one JSON record per line");
    cmd->add_option("--model", o->model, "Checkpoint (.gcfc), gcf or clip baseline")->required();
    cmd->add_option("--input", o->input, "Single descriptor file (.gcfd)");
    cmd->add_option("--data", o->data, "Dataset directory");
    cmd->add_option("--split", o->split, "Split within --data (default test)");
    cmd->add_flag("--truncate", o->truncate, "Keep the first C clips of longer videos");
    cmd->add_option("--limit", o->limit, "Predict at most this many videos");
    cmd->add_option("--out", o->out, "Also write the records to this file");
    cmd->callback([o]() { run_predict(*o); });
}

// --- localize ---------------------------------------------------------------------

struct LocalizeCli {
    std::string model, input, data, split = "test", out;
    double threshold = 0.5;
    bool truncate = false;
    std::size_t limit = 0;
};

void run_localize(const LocalizeCli& o) {
    require(checkpoint_kind(o.model) == "gcf_head", "config_mismatch",
            "localize needs a gcf_head checkpoint with an active gate");
    Checkpoint ckpt = read_checkpoint(o.model);
    require(ckpt.config.uses_gating(), "invalid_config",
            "the " + to_string(ckpt.config.mode) + " head has no gate to localize with");

    auto inputs = gather_inputs(o.input, o.data, o.split);
    if (o.limit > 0 && inputs.size() > o.limit) inputs.resize(o.limit);

    std::vector<std::string> lines;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        ClipDescriptorSet clips = fit_clip_count(inputs[i].first, ckpt.config.C, o.truncate);
        GcfPrediction pred = gcf_predict(clips, ckpt.params);
        LocalizationResult loc = localize(pred.att, o.threshold);
        lines.push_back(json{{"index", i},
                             {"relevant_clips", loc.relevant_clips},
                             {"att", loc.att},
                             {"threshold", loc.threshold}}
                            .dump());
    }
    emit_lines(lines, o.out);
}

void setup_localize(CLI::App& app) {
    auto o = std::make_shared<LocalizeCli>();
    CLI::App* cmd = app.add_subcommand(
        "localize", "Per-video relevant clip indices and gate values, one JSON record per line");
    cmd->add_option("--model", o->model, "gcf checkpoint (.gcfc) with an active gate")->required();
    cmd->add_option("--input", o->input, "Single descriptor file (.gcfd)");
    cmd->add_option("--data", o->data, "Dataset directory");
    cmd->add_option("--split", o->split, "Split within --data (default test)");
    cmd->add_option("--threshold", o->threshold, "Strict gate threshold (default 0.5)");
    cmd->add_flag("--truncate", o->truncate, "Keep the first C clips of longer videos");
    cmd->add_option("--limit", o->limit, "Localize at most this many videos");
    cmd->add_option("--out", o->out, "Also write the records to this file");
    cmd->callback([o]() { run_localize(*o); });
}

// --- gradcheck ----------------------------------------------------------------------

struct GradcheckCli {
    std::size_t trials = 16;
    double tolerance = 1e-6, step = 1e-5;
    std::uint64_t seed = 1;
};

void run_gradcheck(const GradcheckCli& o) {
    require(o.trials >= 1, "invalid_argument", "--trials must be at least 1");
    require(o.tolerance > 0 && o.step > 0, "invalid_argument",
            "--tolerance and --step must be positive");

    const std::size_t Cs[] = {2, 4, 8};
    const std::size_t ds[] = {3, 8};
    const std::size_t Ds[] = {2, 6};
    const std::size_t Ks[] = {2, 5};
    const std::size_t ns[] = {1, 2};
    const double lambdas[] = {0.0, 0.01};
    const GcfMode modes[] = {GcfMode::full, GcfMode::inter_clip_only, GcfMode::clip_wise_only};

    const Rng base(o.seed);
    double overall = 0.0;
    for (std::size_t t = 0; t < o.trials; ++t) {
        Rng rng = base.split(t);
        GcfConfig cfg;
        cfg.C = Cs[rng.uniform_below(3)];
        cfg.d = ds[rng.uniform_below(2)];
        cfg.D = Ds[rng.uniform_below(2)];
        cfg.K = Ks[rng.uniform_below(2)];
        cfg.n = ns[rng.uniform_below(2)];
        cfg.mode = modes[t % 3];
        cfg.with_bias = (t % 2) == 1;
        cfg.normalization =
            (t % 5) == 4 ? ScoreNormalization::divisor : ScoreNormalization::softmax;
        LossConfig loss;
        loss.lambda = lambdas[rng.uniform_below(2)];

        GcfParams params = GcfParams::init(cfg, rng);
        Matrix V(cfg.C, cfg.d);
        for (double& v : V.values()) v = rng.next_gaussian();
        const ClipDescriptorSet clips(V);
        const std::size_t label = rng.uniform_below(cfg.K);

        const Vector p0 = flatten_params(params);
        ForwardTrace trace = gcf_forward(clips, params);
        GcfGrads grads = gcf_backward(trace, label, loss, params);
        const Vector analytic = flatten_params(grads);

        GcfParams probe = params;
        Vector numeric = finite_difference_grad(
            [&](const Vector& p) {
                unflatten_params(p, probe);
                return total_loss(gcf_forward(clips, probe), label, loss);
            },
            p0, o.step);

        double worst = 0.0;
        for (std::size_t i = 0; i < analytic.size(); ++i)
            worst = std::max(worst, relative_error(analytic[i], numeric[i]));
        overall = std::max(overall, worst);

        std::cout << "trial " << std::setw(2) << t << "  mode=" << std::left << std::setw(15)
                  << to_string(cfg.mode) << std::right << " C=" << cfg.C << " d=" << cfg.d
                  << " D=" << cfg.D << " K=" << cfg.K << " n=" << cfg.n
                  << " bias=" << (cfg.with_bias ? "on" : "off")
                  << " norm=" << to_string(cfg.normalization) << " lambda=" << loss.lambda
                  << "  max_rel_err=" << std::scientific << std::setprecision(2) << worst
                  << std::defaultfloat << "\n";
    }

    const bool pass = overall < o.tolerance;
    std::cout << "gradcheck: " << o.trials << " trial(s), overall max_rel_err=" << std::scientific
              << std::setprecision(3) << overall << ", tolerance=" << o.tolerance
              << std::defaultfloat << " -> " << (pass ? "PASS" : "FAIL") << "\n";
    if (!pass) throw GateFailure{};
}

void setup_gradcheck(CLI::App& app) {
    auto o = std::make_shared<GradcheckCli>();
    CLI::App* cmd = app.add_subcommand(
        "gradcheck", "Check analytic gradients against central finite differences");
    cmd->add_option("--trials", o->trials, "Number of random configs (default 16)");
    cmd->add_option("--tolerance", o->tolerance, "Max allowed relative error (default 1e-6)");
    cmd->add_option("--step", o->step, "Finite-difference step (default 1e-5)");
    cmd->add_option("--seed", o->seed, "Trial seed (default 1)");
    cmd->callback([o]() { run_gradcheck(*o); });
}

// --- count ------------------------------------------------------------------------

struct CountCli {
    std::string config_path, preset, mode, normalization;
    std::size_t C = 0, d = 0, D = 0, K = 0, n = 0, h = 0;
    bool with_bias = false, as_json = false;
};

void run_count(const CountCli& o, const CLI::App& cmd) {
    Settings s;
    if (!o.preset.empty()) {
        if (o.preset == "bench-s") {
            s.model.C = 10;
            s.model.d = 64;
            s.model.D = 32;
            s.model.K = 20;
            s.model.n = 1;
            s.model.h = 10;
        } else if (o.preset == "paper") {
            s.model.C = 10;
            s.model.d = 2048;
            s.model.D = 128;
            s.model.K = 600;
            s.model.n = 1;
            s.model.h = 10;
        } else {
            throw GcfError("invalid_argument", "--preset must be bench-s or paper, got " + o.preset);
        }
    }
    if (!o.config_path.empty()) apply_config_file(o.config_path, s);
    auto ov = [&cmd](const char* flag, auto& dst, const auto& src) {
        if (cmd.count(flag)) dst = src;
    };
    ov("--C", s.model.C, o.C);
    ov("--d", s.model.d, o.d);
    ov("--D", s.model.D, o.D);
    ov("--K", s.model.K, o.K);
    ov("--n", s.model.n, o.n);
    ov("--hidden", s.model.h, o.h);
    if (cmd.count("--mode")) s.model.mode = mode_from_string(o.mode);
    if (cmd.count("--normalization"))
        s.model.normalization = score_normalization_from_string(o.normalization);
    if (cmd.count("--with-bias")) s.model.with_bias = o.with_bias;
    s.model.validate();

    const std::uint64_t params_closed = count_params(s.model);
    const std::uint64_t macs_closed = count_flops(s.model);
    Rng rng(0);
    GcfParams params = GcfParams::init(s.model, rng);
    const std::uint64_t params_enum = enumerate_params(params);
    const std::uint64_t macs_measured = measure_macs(params);

    if (o.as_json) {
        std::cout << json{{"config", model_to_json(s.model)},
                          {"params", json{{"closed_form", params_closed},
                                          {"enumerated", params_enum}}},
                          {"macs", json{{"closed_form", macs_closed},
                                        {"measured", macs_measured}}},
                          {"flops_x2", 2 * macs_closed}}
                         .dump()
                  << "\n";
        return;
    }
    std::cout << "mode=" << to_string(s.model.mode) << " C=" << s.model.C << " d=" << s.model.d
              << " D=" << s.model.D << " K=" << s.model.K << " n=" << s.model.n
              << " h=" << s.model.gating_hidden() << " bias=" << (s.model.with_bias ? "on" : "off")
              << "\n";
    std::cout << "params  closed-form " << params_closed << "  enumerated " << params_enum << "\n";
    std::cout << "macs    closed-form " << macs_closed << "  measured   " << macs_measured << "\n";
    std::cout << "flops   x2 convention " << 2 * macs_closed << "\n";
}

void setup_count(CLI::App& app) {
    auto o = std::make_shared<CountCli>();
    CLI::App* cmd =
        app.add_subcommand("count", "Parameter and multiply-accumulate counts for a config");
    cmd->add_option("--config", o->config_path, "JSON config file (model section)");
    cmd->add_option("--preset", o->preset, "bench-s or paper");
    cmd->add_option("--C", o->C, "Clips per video");
    cmd->add_option("--d", o->d, "Raw descriptor width");
    cmd->add_option("--D", o->D, "Fused descriptor width");
    cmd->add_option("--K", o->K, "Class count");
    cmd->add_option("--n", o->n, "Fusion layers");
    cmd->add_option("--hidden", o->h, "Gating hidden width (0 = clip count)");
    cmd->add_option("--mode", o->mode, "full, inter_clip_only, or clip_wise_only");
    cmd->add_option("--normalization", o->normalization, "softmax or divisor");
    cmd->add_flag("--with-bias", o->with_bias, "Enable bias terms");
    cmd->add_flag("--json", o->as_json, "Emit one JSON object instead of text");
    cmd->callback([o, cmd]() { run_count(*o, *cmd); });
}

// --- inspect ----------------------------------------------------------------------

struct InspectCli {
    std::vector<std::string> paths;
};

void run_inspect(const InspectCli& o) {
    for (const std::string& path : o.paths) {
        const std::string head = bytes::read_file(path);
        if (head.rfind("GCFD", 0) == 0) {
            std::cout << path << ": " << describe_descriptor_file(path) << "\n";
        } else if (head.rfind("GCFC", 0) == 0) {
            std::cout << path << ": " << describe_checkpoint_file(path) << "\n";
        } else {
            throw GcfError("bad_magic", path + " is neither a GCFD nor a GCFC file");
        }
    }
}

void setup_inspect(CLI::App& app) {
    auto o = std::make_shared<InspectCli>();
    CLI::App* cmd = app.add_subcommand("inspect", "Print the header of GCFD/GCFC files");
    cmd->add_option("paths", o->paths, "Files to inspect")->required();
    cmd->callback([o]() { run_inspect(*o); });
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 0; i < argc; ++i) {
        if (i) g_command += ' ';
        g_command += argv[i];
    }

    CLI::App app{"gcf: gated clip fusion for video-level action recognition"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "gcf 1.0.0");
    setup_synth(app);
    setup_train(app);
    setup_eval(app);
    setup_predict(app);
    setup_localize(app);
    setup_gradcheck(app);
    setup_count(app);
    setup_inspect(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        std::cerr << error_record("usage", e.what()) << std::endl;
        return 1;
    } catch (const GateFailure&) {
        return 3;
    } catch (const GcfError& e) {
        std::cerr << error_record(e.category(), e.what()) << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << error_record("internal", e.what()) << std::endl;
        return 2;
    }
    return 0;
}
