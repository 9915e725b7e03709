#include "gcf/checkpoint.hpp"

#include <sstream>

#include <json.hpp>

#include "gcf/bytes.hpp"
#include "gcf/error.hpp"

namespace gcf {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'G', 'C', 'F', 'C'};

json config_to_json(const GcfConfig& c) {
    return json{{"C", c.C},           {"d", c.d},
                {"D", c.D},           {"K", c.K},
                {"n", c.n},           {"h", c.h},
                {"mode", to_string(c.mode)},
                {"normalization", to_string(c.normalization)},
                {"with_bias", c.with_bias}};
}

GcfConfig config_from_json(const json& j) {
    GcfConfig c;
    c.C = j.at("C").get<std::size_t>();
    c.d = j.at("d").get<std::size_t>();
    c.D = j.at("D").get<std::size_t>();
    c.K = j.at("K").get<std::size_t>();
    c.n = j.at("n").get<std::size_t>();
    c.h = j.at("h").get<std::size_t>();
    c.mode = mode_from_string(j.at("mode").get<std::string>());
    c.normalization = score_normalization_from_string(j.at("normalization").get<std::string>());
    c.with_bias = j.at("with_bias").get<bool>();
    return c;
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

SgdConfig sgd_from_json(const json& j) {
    SgdConfig s;
    s.lr = j.at("lr").get<double>();
    s.momentum = j.at("momentum").get<double>();
    s.dampening = j.at("dampening").get<double>();
    s.weight_decay = j.at("weight_decay").get<double>();
    s.batch_size = j.at("batch_size").get<std::size_t>();
    s.lr_reductions = j.at("lr_reductions").get<std::size_t>();
    s.lr_factor = j.at("lr_factor").get<double>();
    s.plateau_patience = j.at("plateau_patience").get<std::size_t>();
    return s;
}

void append_tensors(std::string& out, const GcfParams& p) {
    p.for_each_tensor([&](const std::string&, const Matrix& m) {
        for (double v : m.values()) bytes::put_f64(out, v);
    });
}

void read_tensors(const std::string& in, std::size_t& cursor, GcfParams& p,
                  const std::string& what) {
    p.for_each_tensor([&](const std::string& name, Matrix& m) {
        for (double& v : m.values()) v = bytes::get_f64(in, cursor, what + " " + name);
    });
}

// Magic, version, and JSON header, shared by both checkpoint kinds.
json parse_container(const std::string& in, std::size_t& cursor) {
    bytes::check_avail(in, cursor, 4, "magic");
    if (in.compare(0, 4, kMagic, 4) != 0) {
        throw GcfError("bad_magic", "not a GCFC file: bad magic at offset 0");
    }
    cursor = 4;
    const std::uint32_t version = bytes::get_u32(in, cursor, "version");
    if (version != kCheckpointVersion) {
        throw GcfError("version_mismatch",
                       "unsupported GCFC version " + std::to_string(version) + " at offset 4 "
                       "(expected " + std::to_string(kCheckpointVersion) + ")");
    }
    const std::uint64_t header_len = bytes::get_u64(in, cursor, "header length");
    bytes::check_avail(in, cursor, header_len, "JSON header");
    json header;
    try {
        header = json::parse(in.substr(cursor, header_len));
    } catch (const json::exception& e) {
        throw GcfError("bad_header", std::string("GCFC header is not valid JSON: ") + e.what());
    }
    cursor += header_len;
    return header;
}

std::string kind_of(const json& header) {
    try {
        return header.at("kind").get<std::string>();
    } catch (const json::exception& e) {
        throw GcfError("bad_header", std::string("GCFC header is missing fields: ") + e.what());
    }
}

void reject_trailing(const std::string& in, std::size_t cursor) {
    if (cursor != in.size()) {
        throw GcfError("trailing_bytes", "GCFC file has " + std::to_string(in.size() - cursor) +
                                             " unexpected byte(s) after offset " +
                                             std::to_string(cursor));
    }
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
    ckpt.params.validate();
    ckpt.sgd.validate();
    ckpt.loss.validate();
    require(ckpt.params.config == ckpt.config, "invalid_config",
            "checkpoint: params carry a different config than the checkpoint header");

    json tensors = json::array();
    ckpt.params.for_each_tensor([&](const std::string& name, const Matrix& m) {
        tensors.push_back(json{{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
    });
    json header{{"kind", "gcf_head"},
                {"config", config_to_json(ckpt.config)},
                {"sgd", sgd_to_json(ckpt.sgd)},
                {"loss", json{{"lambda", ckpt.loss.lambda}}},
                {"tensors", tensors}};
    const std::string header_str = header.dump();

    std::string out;
    out.append(kMagic, 4);
    bytes::put_u32(out, kCheckpointVersion);
    bytes::put_u64(out, header_str.size());
    out += header_str;

    append_tensors(out, ckpt.params);
    append_tensors(out, ckpt.state.sgd.buffers);
    bytes::put_f64(out, ckpt.state.schedule.lr);
    bytes::put_f64(out, ckpt.state.schedule.best_val_loss);
    bytes::put_u64(out, ckpt.state.schedule.bad_epochs);
    bytes::put_u64(out, ckpt.state.schedule.reductions_done);
    bytes::put_u8(out, ckpt.state.schedule.stopped ? 1 : 0);
    bytes::put_u64(out, ckpt.state.epochs_done);
    bytes::put_u64(out, ckpt.state.sgd.steps);
    bytes::put_u64(out, ckpt.state.shuffle_rng.seed());
    for (std::uint64_t w : ckpt.state.shuffle_rng.state()) bytes::put_u64(out, w);
    return out;
}

Checkpoint decode_checkpoint(const std::string& in) {
    std::size_t cursor = 0;
    const json header = parse_container(in, cursor);
    const std::string kind = kind_of(header);
    require(kind == "gcf_head", "config_mismatch",
            "GCFC file holds a " + kind + " checkpoint, expected gcf_head");

    Checkpoint ckpt;
    try {
        ckpt.config = config_from_json(header.at("config"));
        ckpt.sgd = sgd_from_json(header.at("sgd"));
        ckpt.loss.lambda = header.at("loss").at("lambda").get<double>();
    } catch (const json::exception& e) {
        throw GcfError("bad_header", std::string("GCFC header is missing fields: ") + e.what());
    }
    ckpt.config.validate();
    ckpt.sgd.validate();
    ckpt.loss.validate();

    // Rebuild the parameter skeleton from the config, then check it against
    // the header's tensor manifest before overwriting values.
    Rng scratch(0);
    ckpt.params = GcfParams::init(ckpt.config, scratch);
    const json& tensors = header.at("tensors");
    std::size_t t = 0;
    ckpt.params.for_each_tensor([&](const std::string& name, const Matrix& m) {
        require(t < tensors.size(), "bad_header", "GCFC tensor manifest is shorter than config implies");
        const json& entry = tensors.at(t);
        require(entry.at("name").get<std::string>() == name &&
                    entry.at("rows").get<std::size_t>() == m.rows() &&
                    entry.at("cols").get<std::size_t>() == m.cols(),
                "shape_mismatch",
                "GCFC tensor manifest disagrees with config at tensor " + name);
        ++t;
    });
    require(t == tensors.size(), "bad_header", "GCFC tensor manifest has extra entries");

    read_tensors(in, cursor, ckpt.params, "weights of");
    ckpt.state.sgd.buffers = GcfParams::zeros_like(ckpt.params);
    read_tensors(in, cursor, ckpt.state.sgd.buffers, "optimizer buffer of");
    ckpt.state.schedule.lr = bytes::get_f64(in, cursor, "schedule lr");
    ckpt.state.schedule.best_val_loss = bytes::get_f64(in, cursor, "schedule best loss");
    ckpt.state.schedule.bad_epochs = bytes::get_u64(in, cursor, "schedule bad epochs");
    ckpt.state.schedule.reductions_done = bytes::get_u64(in, cursor, "schedule reductions");
    ckpt.state.schedule.stopped = bytes::get_u8(in, cursor, "schedule stop flag") != 0;
    ckpt.state.epochs_done = bytes::get_u64(in, cursor, "epoch counter");
    ckpt.state.sgd.steps = bytes::get_u64(in, cursor, "optimizer step counter");
    const std::uint64_t rng_seed = bytes::get_u64(in, cursor, "rng seed");
    std::array<std::uint64_t, 4> rng_state;
    for (auto& w : rng_state) w = bytes::get_u64(in, cursor, "rng state");
    ckpt.state.shuffle_rng = Rng(rng_seed);
    ckpt.state.shuffle_rng.set_state(rng_state);

    reject_trailing(in, cursor);
    ckpt.params.for_each_tensor([](const std::string& name, const Matrix& m) {
        m.ensure_finite("checkpoint tensor " + name);
    });
    ckpt.params.validate();
    return ckpt;
}

Checkpoint read_checkpoint(const std::string& path) {
    return decode_checkpoint(bytes::read_file(path));
}

void write_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    bytes::write_file(path, encode_checkpoint(ckpt));
}

std::string encode_clip_checkpoint(const ClipCheckpoint& ckpt) {
    ckpt.clf.validate();
    ckpt.sgd.validate();

    json header{{"kind", "clip_classifier"},
                {"config", json{{"K", ckpt.clf.W.rows()}, {"d", ckpt.clf.W.cols()}}},
                {"sgd", sgd_to_json(ckpt.sgd)},
                {"tensors", json::array({json{{"name", "clip.W"},
                                              {"rows", ckpt.clf.W.rows()},
                                              {"cols", ckpt.clf.W.cols()}}})}};
    const std::string header_str = header.dump();

    std::string out;
    out.append(kMagic, 4);
    bytes::put_u32(out, kCheckpointVersion);
    bytes::put_u64(out, header_str.size());
    out += header_str;
    for (double v : ckpt.clf.W.values()) bytes::put_f64(out, v);
    bytes::put_u64(out, ckpt.epochs_done);
    return out;
}

ClipCheckpoint decode_clip_checkpoint(const std::string& in) {
    std::size_t cursor = 0;
    const json header = parse_container(in, cursor);
    const std::string kind = kind_of(header);
    require(kind == "clip_classifier", "config_mismatch",
            "GCFC file holds a " + kind + " checkpoint, expected clip_classifier");

    ClipCheckpoint ckpt;
    std::size_t K = 0;
    std::size_t d = 0;
    try {
        K = header.at("config").at("K").get<std::size_t>();
        d = header.at("config").at("d").get<std::size_t>();
        ckpt.sgd = sgd_from_json(header.at("sgd"));
        const json& tensors = header.at("tensors");
        require(tensors.size() == 1 && tensors.at(0).at("name").get<std::string>() == "clip.W" &&
                    tensors.at(0).at("rows").get<std::size_t>() == K &&
                    tensors.at(0).at("cols").get<std::size_t>() == d,
                "shape_mismatch", "GCFC tensor manifest disagrees with config at tensor clip.W");
    } catch (const json::exception& e) {
        throw GcfError("bad_header", std::string("GCFC header is missing fields: ") + e.what());
    }
    require(K >= 2 && d >= 1, "bad_header", "GCFC clip classifier has an unusable W shape");
    ckpt.sgd.validate();

    ckpt.clf.W = Matrix(K, d);
    for (double& v : ckpt.clf.W.values()) v = bytes::get_f64(in, cursor, "weights of clip.W");
    ckpt.epochs_done = bytes::get_u64(in, cursor, "epoch counter");

    reject_trailing(in, cursor);
    ckpt.clf.W.ensure_finite("checkpoint tensor clip.W");
    ckpt.clf.validate();
    return ckpt;
}

ClipCheckpoint read_clip_checkpoint(const std::string& path) {
    return decode_clip_checkpoint(bytes::read_file(path));
}

void write_clip_checkpoint(const ClipCheckpoint& ckpt, const std::string& path) {
    bytes::write_file(path, encode_clip_checkpoint(ckpt));
}

std::string checkpoint_kind(const std::string& path) {
    const std::string in = bytes::read_file(path);
    std::size_t cursor = 0;
    return kind_of(parse_container(in, cursor));
}

void ensure_config_matches(const GcfConfig& expected, const GcfConfig& actual) {
    auto check = [](bool ok, const std::string& field, const std::string& got,
                    const std::string& want) {
        require(ok, "config_mismatch",
                "checkpoint config mismatch in " + field + ": checkpoint has " + got +
                    ", expected " + want);
    };
    check(expected.C == actual.C, "C", std::to_string(actual.C), std::to_string(expected.C));
    check(expected.d == actual.d, "d", std::to_string(actual.d), std::to_string(expected.d));
    check(expected.D == actual.D, "D", std::to_string(actual.D), std::to_string(expected.D));
    check(expected.K == actual.K, "K", std::to_string(actual.K), std::to_string(expected.K));
    check(expected.n == actual.n, "n", std::to_string(actual.n), std::to_string(expected.n));
    check(expected.h == actual.h, "h", std::to_string(actual.h), std::to_string(expected.h));
    check(expected.mode == actual.mode, "mode", to_string(actual.mode), to_string(expected.mode));
    check(expected.normalization == actual.normalization, "normalization",
          to_string(actual.normalization), to_string(expected.normalization));
    check(expected.with_bias == actual.with_bias, "with_bias",
          actual.with_bias ? "true" : "false", expected.with_bias ? "true" : "false");
}

std::string describe_checkpoint_file(const std::string& path) {
    const std::string in = bytes::read_file(path);
    std::size_t cursor = 0;
    const json header = parse_container(in, cursor);
    std::ostringstream out;
    if (kind_of(header) == "clip_classifier") {
        ClipCheckpoint ckpt = decode_clip_checkpoint(in);
        out << "GCFC v" << kCheckpointVersion << "  clip_classifier  K=" << ckpt.clf.W.rows()
            << " d=" << ckpt.clf.W.cols() << "  epochs_done=" << ckpt.epochs_done;
        return std::move(out).str();
    }
    Checkpoint ckpt = decode_checkpoint(in);
    out << "GCFC v" << kCheckpointVersion << "  gcf_head  mode=" << to_string(ckpt.config.mode)
        << "  C=" << ckpt.config.C << " d=" << ckpt.config.d << " D=" << ckpt.config.D
        << " K=" << ckpt.config.K << " n=" << ckpt.config.n
        << " h=" << ckpt.config.gating_hidden() << "  epochs_done=" << ckpt.state.epochs_done
        << "  lr=" << ckpt.state.schedule.lr
        << (ckpt.state.schedule.stopped ? "  (stopped)" : "");
    return std::move(out).str();
}

}  // namespace gcf
