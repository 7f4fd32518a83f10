#pragma once

// QP-ladder sweeps over registry profiles with a resumable on-disk result
// store, and BD-rate / relative-time comparison against an anchor.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "fcm/bd_metrics.hpp"
#include "fcm/binary_io.hpp"
#include "fcm/codec/codec.hpp"
#include "fcm/packer.hpp"
#include "fcm/pareto.hpp"
#include "fcm/profiles.hpp"
#include "fcm/tensor_io.hpp"

namespace fcm::sweep {

inline const std::vector<int> kDefaultLadder = {22, 27, 32, 37};
inline constexpr double kPsnrCap = 100.0;  // reported for lossless cells

/// What gets coded. `info` and `tensors` are optional: without them the
/// feature-domain error cannot be measured and is reported as NaN.
struct Content {
    PackedVideo video;
    PackInfo info;
    std::optional<FeatureTensorSet> tensors;
};

inline Content content_from_tensors(const FeatureTensorSet& set, int align = 64) {
    auto packed = pack(set, align);
    return {std::move(packed.video), std::move(packed.info), set};
}

struct Cell {
    std::string id;
    int qp = 0;
    bool ok = false;
    bool from_store = false;
    std::string error;
    double rate_bits = 0.0;
    double psnr = 0.0;
    double feature_mse = 0.0;
    double enc_seconds = 0.0;
    double dec_seconds = 0.0;
};

struct SweepOptions {
    std::vector<std::string> ids = {"default"};
    std::vector<int> qps = kDefaultLadder;
    int jobs = 1;
    std::filesystem::path store;  // empty: no persistence
    codec::EncoderOptions encoder;
};

struct SweepResult {
    std::string content_digest;
    std::vector<std::string> ids;
    std::vector<Cell> cells;  // id-major, ladder order
    int encodes = 0;
    int store_hits = 0;

    [[nodiscard]] int failures() const {
        return static_cast<int>(std::count_if(cells.begin(), cells.end(), [](const Cell& c) { return !c.ok; }));
    }
    [[nodiscard]] std::vector<const Cell*> cells_of(std::string_view id) const {
        std::vector<const Cell*> out;
        for (const auto& c : cells)
            if (c.id == id) out.push_back(&c);
        return out;
    }
    /// Successful cells of one id as an RD series.
    [[nodiscard]] bd::RdSeries series(std::string_view id) const {
        bd::RdSeries s{std::string(id), {}};
        for (const auto* c : cells_of(id))
            if (c->ok) s.points.push_back({c->qp, c->rate_bits, c->psnr, c->feature_mse});
        return s;
    }
};

/// Store root: FCMBENCH_STORE when set, else ./results.
inline std::filesystem::path default_store_root() {
    if (const char* env = std::getenv("FCMBENCH_STORE"); env && *env) return env;
    return "results";
}

namespace detail {

inline double psnr10(const PackedVideo& a, const PackedVideo& b) {
    double sse = 0.0;
    std::size_t n = 0;
    for (std::size_t f = 0; f < a.frames.size(); ++f)
        for (std::size_t i = 0; i < a.frames[f].size(); ++i) {
            const double d = static_cast<double>(a.frames[f][i]) - b.frames[f][i];
            sse += d * d;
            ++n;
        }
    if (sse == 0.0) return kPsnrCap;
    const double mse = sse / static_cast<double>(n);
    return std::min(kPsnrCap, 10.0 * std::log10(static_cast<double>(kMaxSample) * kMaxSample / mse));
}

/// Everything that determines a cell's coded output besides the content.
inline std::string cell_key(const codec::CodecConfig& cfg, const codec::EncoderOptions& opt) {
    Fnv1a h;
    ByteWriter w;
    codec::write_config(w, cfg);
    h.update(w.data());
    h.update_u64(static_cast<std::uint64_t>(cfg.qp));
    h.update_u64(opt.tool_fallback ? 1 : 0);
    return h.hex();
}

inline std::filesystem::path cell_path(const std::filesystem::path& root, const std::string& digest, const std::string& id, int qp) {
    return root / digest / id / (std::to_string(qp) + ".json");
}

inline nlohmann::json cell_json(const Cell& c, const std::string& key) {
    nlohmann::json j = {{"id", c.id},       {"qp", c.qp},           {"key", key},
                        {"rate_bits", c.rate_bits}, {"psnr", c.psnr}, {"enc_seconds", c.enc_seconds},
                        {"dec_seconds", c.dec_seconds}};
    j["feature_mse"] = std::isfinite(c.feature_mse) ? nlohmann::json(c.feature_mse) : nlohmann::json(nullptr);
    return j;
}

/// A stored cell, if present, readable and produced under the same key.
inline std::optional<Cell> load_cell(const std::filesystem::path& p, const std::string& key) {
    std::error_code ec;
    if (!std::filesystem::exists(p, ec)) return std::nullopt;
    try {
        const auto j = nlohmann::json::parse(read_text_file(p));
        if (j.at("key").get<std::string>() != key) return std::nullopt;
        Cell c;
        c.id = j.at("id").get<std::string>();
        c.qp = j.at("qp").get<int>();
        c.rate_bits = j.at("rate_bits").get<double>();
        c.psnr = j.at("psnr").get<double>();
        c.feature_mse = j.at("feature_mse").is_null() ? std::nan("") : j.at("feature_mse").get<double>();
        c.enc_seconds = j.at("enc_seconds").get<double>();
        c.dec_seconds = j.at("dec_seconds").get<double>();
        c.ok = true;
        c.from_store = true;
        return c;
    } catch (const std::exception&) {
        return std::nullopt;  // unreadable cells are recomputed
    }
}

/// Write-then-rename so a crashed run never leaves a half-written cell.
inline void store_cell(const std::filesystem::path& p, const nlohmann::json& j) {
    std::filesystem::create_directories(p.parent_path());
    auto tmp = p;
    tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
    write_text_file(tmp, j.dump(2) + "\n");
    std::filesystem::rename(tmp, p);
}

inline Cell run_cell(const Content& content, const std::string& id, int qp, const codec::CodecConfig& cfg,
                     const codec::EncoderOptions& opt) {
    Cell c;
    c.id = id;
    c.qp = qp;
    try {
        const auto enc = codec::encode_sequence(content.video, cfg, opt);
        const auto t0 = std::chrono::steady_clock::now();
        const auto dec = codec::decode_bitstream(enc.bitstream);
        c.dec_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (dec.video != enc.reconstruction) throw CorruptionError("decoder output differs from encoder reconstruction");
        c.enc_seconds = enc.seconds;
        c.rate_bits = 8.0 * static_cast<double>(enc.bitstream.size());
        c.psnr = psnr10(content.video, dec.video);
        c.feature_mse = std::nan("");
        if (!content.info.empty()) {
            const auto rec = unpack(dec.video, content.info);
            const auto ref = content.tensors ? *content.tensors : unpack(content.video, content.info);
            c.feature_mse = feature_distortion(ref, rec).aggregate_mse;
        }
        c.ok = true;
    } catch (const std::exception& e) {
        c.error = e.what();
    }
    return c;
}

}  // namespace detail

/// Runs every (id, qp) cell. Cells found in the store under the same
/// configuration are reused; failed cells are reported, never stored.
inline SweepResult run_sweep(const Content& content, const SweepOptions& opt) {
    validate(content.video);
    if (opt.qps.size() < static_cast<std::size_t>(bd::kMinCurvePoints)) throw ValidationError("QP ladder needs at least 4 points");
    if (opt.ids.empty()) throw ValidationError("no profiles to sweep");
    if (opt.jobs < 1) throw ValidationError("jobs must be >= 1");
    for (int qp : opt.qps)
        if (qp < 0 || qp > 63) throw ValidationError("qp " + std::to_string(qp) + " outside 0..63");
    for (const auto& id : opt.ids) profiles::lookup(id);

    SweepResult r;
    r.content_digest = content_digest(content.video);
    r.ids = opt.ids;
    struct Job {
        std::string id;
        int qp;
        codec::CodecConfig cfg;
        std::string key;
    };
    std::vector<Job> jobs;
    for (const auto& id : opt.ids) {
        const auto base = profiles::resolve(id).config;
        for (int qp : opt.qps) {
            auto cfg = base;
            cfg.qp = qp;
            jobs.push_back({id, qp, cfg, detail::cell_key(cfg, opt.encoder)});
        }
    }
    r.cells.resize(jobs.size());

    std::atomic<std::size_t> next{0};
    std::atomic<int> encodes{0}, hits{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < jobs.size();) {
            const auto& j = jobs[i];
            std::filesystem::path path;
            if (!opt.store.empty()) {
                path = detail::cell_path(opt.store, r.content_digest, j.id, j.qp);
                if (auto c = detail::load_cell(path, j.key)) {
                    r.cells[i] = std::move(*c);
                    ++hits;
                    continue;
                }
            }
            r.cells[i] = detail::run_cell(content, j.id, j.qp, j.cfg, opt.encoder);
            ++encodes;
            if (r.cells[i].ok && !path.empty()) {
                try {
                    detail::store_cell(path, detail::cell_json(r.cells[i], j.key));
                } catch (const std::exception& e) {
                    r.cells[i].ok = false;
                    r.cells[i].error = std::string("store: ") + e.what();
                }
            }
        }
    };
    const int n = std::min<int>(opt.jobs, static_cast<int>(jobs.size()));
    std::vector<std::thread> pool;
    for (int k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    r.encodes = encodes;
    r.store_hits = hits;
    return r;
}

// ---------------------------------------------------------------------------
// Comparison against an anchor

inline constexpr std::string_view kScaleLabel = "mini-codec scale";

struct CompareRow {
    std::string id;
    std::optional<double> bd_rate;          // PSNR axis, percent
    std::optional<double> bd_rate_feature;  // feature-MSE axis, percent
    double enc_time = 0.0;                  // percent of anchor
    double dec_time = 0.0;
    std::string note;
};

struct Comparison {
    std::string anchor;
    std::vector<CompareRow> rows;
};

namespace detail {

inline double mean_of(const std::vector<const Cell*>& cells, double Cell::*field) {
    double s = 0.0;
    int n = 0;
    for (const auto* c : cells)
        if (c->ok) {
            s += c->*field;
            ++n;
        }
    return n ? s / n : std::nan("");
}

inline std::optional<double> try_bd(const bd::RdSeries& a, const bd::RdSeries& t, bd::QualityAxis axis, std::string& note) {
    try {
        return bd::bd_rate(bd::make_curve(a, axis), bd::make_curve(t, axis));
    } catch (const Error& e) {
        if (note.empty()) note = e.what();
        return std::nullopt;
    }
}

}  // namespace detail

/// BD-rate of every swept id against `anchor_id` plus mean encode/decode
/// time as a percentage of the anchor's. Rows whose curves are unusable
/// carry a note instead of a number.
inline Comparison compare(const SweepResult& sweep, const std::string& anchor_id) {
    if (std::find(sweep.ids.begin(), sweep.ids.end(), anchor_id) == sweep.ids.end())
        throw ValidationError("anchor '" + anchor_id + "' is not part of the sweep");
    const auto anchor = sweep.series(anchor_id);
    const auto anchor_cells = sweep.cells_of(anchor_id);
    const double a_enc = detail::mean_of(anchor_cells, &Cell::enc_seconds);
    const double a_dec = detail::mean_of(anchor_cells, &Cell::dec_seconds);
    const bool feature_axis =
        std::all_of(anchor.points.begin(), anchor.points.end(), [](const bd::RdSample& s) { return std::isfinite(s.feature_mse); });

    Comparison out{anchor_id, {}};
    for (const auto& id : sweep.ids) {
        CompareRow row;
        row.id = id;
        const auto s = sweep.series(id);
        row.bd_rate = detail::try_bd(anchor, s, bd::QualityAxis::psnr, row.note);
        if (feature_axis) row.bd_rate_feature = detail::try_bd(anchor, s, bd::QualityAxis::feature_mse, row.note);
        const auto cells = sweep.cells_of(id);
        row.enc_time = 100.0 * detail::mean_of(cells, &Cell::enc_seconds) / a_enc;
        row.dec_time = 100.0 * detail::mean_of(cells, &Cell::dec_seconds) / a_dec;
        out.rows.push_back(std::move(row));
    }
    return out;
}

inline nlohmann::json to_json(const Comparison& c) {
    nlohmann::json j;
    j["scale"] = kScaleLabel;
    j["anchor"] = c.anchor;
    j["rows"] = nlohmann::json::array();
    auto num = [](const std::optional<double>& v) { return v && std::isfinite(*v) ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    for (const auto& r : c.rows) {
        nlohmann::json row = {{"id", r.id},
                              {"bd_rate", num(r.bd_rate)},
                              {"bd_rate_feature", num(r.bd_rate_feature)},
                              {"enc_time", num(r.enc_time)},
                              {"dec_time", num(r.dec_time)}};
        if (!r.note.empty()) row["note"] = r.note;
        j["rows"].push_back(std::move(row));
    }
    return j;
}

inline Comparison comparison_from_json(const nlohmann::json& j) {
    try {
        Comparison c;
        c.anchor = j.at("anchor").get<std::string>();
        auto opt = [](const nlohmann::json& v) { return v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()); };
        for (const auto& r : j.at("rows")) {
            CompareRow row;
            row.id = r.at("id").get<std::string>();
            row.bd_rate = opt(r.at("bd_rate"));
            row.bd_rate_feature = opt(r.value("bd_rate_feature", nlohmann::json(nullptr)));
            row.enc_time = opt(r.at("enc_time")).value_or(std::nan(""));
            row.dec_time = opt(r.at("dec_time")).value_or(std::nan(""));
            row.note = r.value("note", "");
            c.rows.push_back(std::move(row));
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad comparison JSON: ") + e.what());
    }
}

inline void write_text(std::ostream& os, const Comparison& c) {
    os << "BD-rate vs " << c.anchor << " (" << kScaleLabel << ")\n";
    os << std::left << std::setw(10) << "id" << std::right << std::setw(14) << "BD-rate PSNR" << std::setw(14) << "BD-rate feat"
       << std::setw(10) << "enc %" << std::setw(10) << "dec %" << '\n';
    auto cell = [&](const std::optional<double>& v, int w) {
        if (v && std::isfinite(*v))
            os << std::setw(w) << *v;
        else
            os << std::setw(w) << "n/a";
    };
    os << std::fixed << std::setprecision(2);
    for (const auto& r : c.rows) {
        os << std::left << std::setw(10) << r.id << std::right;
        cell(r.bd_rate, 14);
        cell(r.bd_rate_feature, 14);
        cell(r.enc_time, 10);
        cell(r.dec_time, 10);
        if (!r.note.empty()) os << "  (" << r.note << ')';
        os << '\n';
    }
    os.unsetf(std::ios::fixed);
}

/// Trade-off points of a comparison (encode time %, PSNR BD-rate %).
/// Rows without a BD-rate or a positive time are left out.
inline std::vector<pareto::TradeoffPoint> tradeoff_points(const Comparison& c) {
    std::vector<pareto::TradeoffPoint> out;
    for (const auto& r : c.rows)
        if (r.bd_rate && std::isfinite(*r.bd_rate) && std::isfinite(r.enc_time) && r.enc_time > 0.0)
            out.push_back({r.id, r.enc_time, *r.bd_rate});
    return out;
}

}  // namespace fcm::sweep
