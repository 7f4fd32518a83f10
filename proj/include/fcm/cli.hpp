#pragma once

// fcmbench command line. Every subcommand parses its flags, checks paths,
// then hands over to the library; run() maps error kinds to exit codes.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fcm/bd_metrics.hpp"
#include "fcm/binary_io.hpp"
#include "fcm/codec/codec.hpp"
#include "fcm/packer.hpp"
#include "fcm/pareto.hpp"
#include "fcm/profiles.hpp"
#include "fcm/stats.hpp"
#include "fcm/sweep.hpp"
#include "fcm/tensor_io.hpp"

namespace fcm::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kCorrupt = 2, kPartial = 3 };

/// Flags shared by every subcommand (accepted before or after it).
struct Globals {
    std::uint64_t seed = 1;
    bool json = false;
    std::string base = "64x64";
    int frames = 2;
    std::string noise = "gaussian_blobs";
};

namespace detail {

namespace fs = std::filesystem;

inline void require_file(const std::string& path, std::string_view what) {
    if (path.empty()) throw ValidationError(std::string(what) + " path is required");
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw ValidationError(std::string(what) + " '" + path + "' does not exist");
}

inline void require_output(const std::string& path) {
    if (path.empty()) throw ValidationError("output path is required");
    const auto parent = fs::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty() && !fs::is_directory(parent, ec))
        throw ValidationError("output directory '" + parent.string() + "' does not exist");
}

inline std::pair<int, int> parse_geometry(const std::string& s) {
    const auto x = s.find('x');
    try {
        if (x == std::string::npos) throw std::invalid_argument(s);
        const int h = std::stoi(s.substr(0, x)), w = std::stoi(s.substr(x + 1));
        if (h < 1 || w < 1) throw std::invalid_argument(s);
        return {h, w};
    } catch (const std::logic_error&) {
        throw ValidationError("geometry must look like HxW, got '" + s + "'");
    }
}

inline std::vector<int> parse_int_list(const std::string& s, std::string_view what) {
    std::vector<int> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw ValidationError("bad " + std::string(what) + " entry '" + item + "'");
        }
    }
    return out;
}

inline std::vector<std::string> parse_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

inline FeatureTensorSet synth_content(const std::string& spec, const Globals& g) {
    SynthSpec s;
    s.family = parse_synth_family(spec.substr(6));
    std::tie(s.base_height, s.base_width) = parse_geometry(g.base);
    s.frames = g.frames;
    s.noise_model = parse_noise_model(g.noise);
    s.seed = g.seed;
    return synth_tensor_set(s);
}

inline bool has_magic(const std::string& path, const char (&magic)[4]) {
    std::ifstream in(path, std::ios::binary);
    char buf[4] = {};
    in.read(buf, 4);
    return in.gcount() == 4 && std::equal(buf, buf + 4, magic);
}

/// Content from `synth:<family>`, an FCT file or a PKV file.
inline sweep::Content load_content(const std::string& content, const std::string& input, const Globals& g) {
    if (!content.empty()) {
        if (content.rfind("synth:", 0) != 0) throw ValidationError("--content must look like synth:<family>");
        return sweep::content_from_tensors(synth_content(content, g));
    }
    require_file(input, "input");
    if (has_magic(input, fcm::detail::kFctMagic)) return sweep::content_from_tensors(load_tensor_set(input));
    auto p = load_packed(input);
    return {std::move(p.video), std::move(p.info), std::nullopt};
}

inline std::string fixed2(double v) {
    v = std::round(v * 100.0) / 100.0;
    if (v == 0.0) v = 0.0;  // no "-0.00"
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
}

inline std::string kind_name(profiles::EntryKind k) {
    switch (k) {
        case profiles::EntryKind::anchor: return "anchor";
        case profiles::EntryKind::group: return "group";
        case profiles::EntryKind::combination: return "combination";
        case profiles::EntryKind::profile: return "profile";
    }
    return "?";
}

inline nlohmann::json metrics_json(const profiles::PublishedMetrics& m) {
    nlohmann::json per;
    for (std::size_t i = 0; i < profiles::kDatasets.size(); ++i) per[std::string(profiles::kDatasets[i])] = m.bd_rate[i];
    return {{"bd_rate", per}, {"avg_bd_rate", m.avg_bd_rate}, {"enc_time", m.enc_time}, {"dec_time", m.dec_time}};
}

inline nlohmann::json delta_json(const profiles::ConfigDelta& d) {
    nlohmann::json j;
    j["disabled_tools"] = nlohmann::json::array();
    for (auto t : codec::kAllTools)
        if (d.disabled.has(t)) j["disabled_tools"].push_back(std::string(codec::tool_name(t)));
    if (d.max_mtt_depth) j["max_mtt_depth"] = *d.max_mtt_depth;
    if (d.search_range) j["search_range"] = *d.search_range;
    if (d.intra_modes) {
        std::vector<int> all = {codec::kPlanar, codec::kDc};
        all.insert(all.end(), d.intra_modes->begin(), d.intra_modes->end());
        j["allowed_intra_modes"] = all;
    }
    j["external_off"] = d.external_off;
    return j;
}

inline void print_front(std::ostream& out, const std::vector<pareto::TradeoffPoint>& front, bool json) {
    if (json) {
        auto j = nlohmann::json::array();
        for (const auto& p : front) j.push_back({{"id", p.id}, {"enc_time", p.x}, {"bd_rate", p.y}});
        out << j.dump(2) << '\n';
        return;
    }
    out << "Pareto front (encoding time %, BD-rate %)\n";
    for (const auto& p : front) out << "  " << std::left << std::setw(10) << p.id << std::right << std::setw(9) << fixed2(p.x) << std::setw(9) << fixed2(p.y) << '\n';
}

}  // namespace detail

/// Parses argv and runs one subcommand. Output goes to `out`, diagnostics
/// and usage text to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    using namespace detail;
    CLI::App app{"Feature-coding ablation toolkit", "fcmbench"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Seed for synthetic content");
    app.add_flag("--json", g.json, "Machine-readable output");
    app.add_option("--base", g.base, "Synthetic network input size HxW")->capture_default_str();
    app.add_option("--frames", g.frames, "Synthetic frame count")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--noise", g.noise, "Synthetic noise model")->capture_default_str();

    std::function<int()> action;

    // pack
    auto* pack_cmd = app.add_subcommand("pack", "Feature tensors (FCT) to a packed 10-bit video (PKV)");
    std::string pk_in, pk_content, pk_out;
    int pk_align = 64;
    pack_cmd->add_option("-i,--input", pk_in, "Input FCT");
    pack_cmd->add_option("--content", pk_content, "synth:<family> instead of an input file");
    pack_cmd->add_option("-o,--output", pk_out, "Output PKV")->required();
    pack_cmd->add_option("--align", pk_align, "Frame size multiple")->capture_default_str()->check(CLI::PositiveNumber);
    pack_cmd->callback([&] {
        action = [&] {
            require_output(pk_out);
            FeatureTensorSet set;
            if (!pk_content.empty()) {
                if (pk_content.rfind("synth:", 0) != 0) throw ValidationError("--content must look like synth:<family>");
                set = synth_content(pk_content, g);
            } else {
                require_file(pk_in, "input");
                set = load_tensor_set(pk_in);
            }
            const auto r = pack(set, pk_align);
            save_packed(r.video, r.info, pk_out);
            out << "packed " << set.tensors.size() << " tensors into " << r.video.frame_count << " frame(s) of " << r.video.width << 'x'
                << r.video.height << '\n';
            return kOk;
        };
    });

    // unpack
    auto* unpack_cmd = app.add_subcommand("unpack", "Packed video (PKV with layout) back to feature tensors (FCT)");
    std::string up_in, up_layout, up_out;
    unpack_cmd->add_option("-i,--input", up_in, "Input PKV")->required();
    unpack_cmd->add_option("--layout", up_layout, "PKV whose layout to use (default: the input's own)");
    unpack_cmd->add_option("-o,--output", up_out, "Output FCT")->required();
    unpack_cmd->callback([&] {
        action = [&] {
            require_file(up_in, "input");
            if (!up_layout.empty()) require_file(up_layout, "layout");
            require_output(up_out);
            auto p = load_packed(up_in);
            const auto info = up_layout.empty() ? p.info : load_packed(up_layout).info;
            if (info.empty()) throw ValidationError("packed video carries no layout; pass --layout");
            const auto set = unpack(p.video, info);
            save_tensor_set(set, up_out);
            out << "unpacked " << set.tensors.size() << " tensors\n";
            return kOk;
        };
    });

    // encode
    auto* enc_cmd = app.add_subcommand("encode", "Packed video (PKV) to a bitstream (FCB)");
    std::string en_in, en_content, en_out, en_csv, en_profile = "default";
    int en_qp = 32;
    bool en_no_fallback = false;
    enc_cmd->add_option("-i,--input", en_in, "Input PKV or FCT");
    enc_cmd->add_option("--content", en_content, "synth:<family> instead of an input file");
    enc_cmd->add_option("-o,--output", en_out, "Output FCB")->required();
    enc_cmd->add_option("--profile", en_profile, "Registry entry")->capture_default_str();
    enc_cmd->add_option("--qp", en_qp, "Quantisation parameter")->capture_default_str()->check(CLI::Range(0, 63));
    enc_cmd->add_option("--cu-csv", en_csv, "Also write per-CU decisions as CSV");
    enc_cmd->add_flag("--no-fallback", en_no_fallback, "Do not try the all-tools-off pass");
    enc_cmd->callback([&] {
        action = [&] {
            require_output(en_out);
            if (!en_csv.empty()) require_output(en_csv);
            auto cfg = profiles::resolve(en_profile).config;
            cfg.qp = en_qp;
            const auto content = load_content(en_content, en_in, g);
            const auto r = codec::encode_sequence(content.video, cfg, {!en_no_fallback});
            write_file(en_out, r.bitstream);
            if (!en_csv.empty()) {
                std::ofstream csv(en_csv);
                codec::write_cu_csv(csv, r.records);
                if (!csv) throw IoError("cannot write " + en_csv);
            }
            if (g.json)
                out << nlohmann::json{{"bytes", r.bitstream.size()}, {"cus", r.records.size()}, {"sse", r.sse}, {"seconds", r.seconds}}.dump() << '\n';
            else
                out << "encoded " << r.bitstream.size() << " bytes, " << r.records.size() << " CUs\n";
            return kOk;
        };
    });

    // decode
    auto* dec_cmd = app.add_subcommand("decode", "Bitstream (FCB) to a packed video (PKV)");
    std::string de_in, de_out, de_layout, de_csv;
    dec_cmd->add_option("-i,--input", de_in, "Input FCB")->required();
    dec_cmd->add_option("-o,--output", de_out, "Output PKV")->required();
    dec_cmd->add_option("--layout", de_layout, "PKV whose layout to attach, so the output can be unpacked");
    dec_cmd->add_option("--cu-csv", de_csv, "Also write parsed CU decisions as CSV");
    dec_cmd->callback([&] {
        action = [&] {
            require_file(de_in, "input");
            if (!de_layout.empty()) require_file(de_layout, "layout");
            require_output(de_out);
            if (!de_csv.empty()) require_output(de_csv);
            const auto r = codec::decode_bitstream(read_file(de_in));
            PackInfo info;
            if (!de_layout.empty()) {
                info = load_packed(de_layout).info;
                if (info.frame_height != r.video.height || info.frame_width != r.video.width || info.frame_count != r.video.frame_count)
                    throw ValidationError("layout does not match the decoded geometry");
            }
            save_packed(r.video, info, de_out);
            if (!de_csv.empty()) {
                std::ofstream csv(de_csv);
                codec::write_cu_csv(csv, r.records);
            }
            out << "decoded " << r.video.frame_count << " frame(s) of " << r.video.width << 'x' << r.video.height << '\n';
            return kOk;
        };
    });

    // stats
    auto* st_cmd = app.add_subcommand("stats", "Mode-decision statistics from a CU CSV");
    std::string st_in, st_dialect = "native", st_map, st_video;
    int st_frame = 0;
    double st_threshold = 0.0;
    st_cmd->add_option("-i,--input", st_in, "CU CSV")->required();
    st_cmd->add_option("--dialect", st_dialect, "native or generic")->capture_default_str()->check(CLI::IsMember({"native", "generic"}));
    st_cmd->add_option("--map", st_map, "Write a partition map (PPM)");
    st_cmd->add_option("--frame", st_frame, "Frame for the partition map")->capture_default_str();
    st_cmd->add_option("--video", st_video, "PKV used as the partition map background");
    st_cmd->add_option("--skip-threshold", st_threshold, "List tools used by fewer than this percent of CUs");
    st_cmd->callback([&] {
        action = [&] {
            require_file(st_in, "input");
            if (!st_video.empty()) require_file(st_video, "video");
            if (!st_map.empty()) require_output(st_map);
            const auto ing = stats::ingest_trace_csv(st_in, st_dialect == "native" ? stats::Dialect::native : stats::Dialect::generic);
            for (const auto& w : ing.warnings) err << "warning: " << w << '\n';
            for (const auto& e : ing.errors) err << "line " << e.line << ": " << e.message << '\n';
            const auto rep = stats::mode_report(ing.records, st_dialect == "native" ? codec::ToolSet::all() : stats::observed_tools(ing.columns));
            std::vector<std::string> skip;
            if (st_threshold != 0.0) skip = stats::skip_candidates(rep, st_threshold);
            if (g.json) {
                auto j = stats::to_json(rep);
                if (st_threshold != 0.0) j["skip_candidates"] = skip;
                j["malformed_rows"] = ing.errors.size();
                out << j.dump(2) << '\n';
            } else {
                stats::write_text(out, rep);
                if (st_threshold != 0.0) {
                    out << "skip candidates (< " << st_threshold << "%):";
                    for (const auto& s : skip) out << ' ' << s;
                    out << '\n';
                }
            }
            if (!st_map.empty()) {
                std::optional<PackedVideo> base;
                if (!st_video.empty()) base = load_packed(st_video).video;
                const auto img = stats::render_partition_map(ing.records, st_frame, base ? &*base : nullptr);
                std::ofstream ppm(st_map, std::ios::binary);
                stats::write_ppm(ppm, img);
                if (!ppm) throw IoError("cannot write " + st_map);
            }
            return kOk;
        };
    });

    // bdrate
    auto* bd_cmd = app.add_subcommand("bdrate", "BD-rate between two RD curves (JSON)");
    std::string bd_anchor, bd_test, bd_axis = "psnr";
    bool bd_quality = false;
    bd_cmd->add_option("--anchor", bd_anchor, "Anchor curve JSON")->required();
    bd_cmd->add_option("--test", bd_test, "Test curve JSON")->required();
    bd_cmd->add_option("--axis", bd_axis, "psnr or feature")->capture_default_str()->check(CLI::IsMember({"psnr", "feature"}));
    bd_cmd->add_flag("--quality", bd_quality, "Report the quality difference at equal rate instead");
    bd_cmd->callback([&] {
        action = [&] {
            require_file(bd_anchor, "anchor");
            require_file(bd_test, "test");
            auto parse = [](const std::string& p) {
                try {
                    return bd::series_from_json(nlohmann::json::parse(read_text_file(p)));
                } catch (const nlohmann::json::exception& e) {
                    throw FormatError(p + ": " + e.what());
                }
            };
            const auto axis = bd_axis == "psnr" ? bd::QualityAxis::psnr : bd::QualityAxis::feature_mse;
            const auto a = bd::make_curve(parse(bd_anchor), axis), t = bd::make_curve(parse(bd_test), axis);
            const double v = bd_quality ? bd::bd_quality(a, t) : bd::bd_rate(a, t);
            if (g.json)
                out << nlohmann::json{{bd_quality ? "bd_quality" : "bd_rate", v}}.dump() << '\n';
            else
                out << fixed2(v) << '\n';
            return kOk;
        };
    });

    // sweep
    auto* sw_cmd = app.add_subcommand("sweep", "Encode a QP ladder per profile and compare against an anchor");
    std::string sw_in, sw_content, sw_profiles = "default", sw_qp = "22,27,32,37", sw_anchor = "default", sw_store, sw_export;
    int sw_jobs = 1;
    bool sw_no_fallback = false;
    sw_cmd->add_option("-i,--input", sw_in, "Input FCT or PKV");
    sw_cmd->add_option("--content", sw_content, "synth:<family> instead of an input file");
    sw_cmd->add_option("--profiles", sw_profiles, "Comma-separated registry entries")->capture_default_str();
    sw_cmd->add_option("--qp", sw_qp, "Comma-separated QP ladder")->capture_default_str();
    sw_cmd->add_option("--anchor", sw_anchor, "Anchor entry for the comparison")->capture_default_str();
    sw_cmd->add_option("--jobs", sw_jobs, "Parallel encodes")->capture_default_str()->check(CLI::PositiveNumber);
    sw_cmd->add_option("--store", sw_store, "Result store root (default: $FCMBENCH_STORE or ./results)");
    sw_cmd->add_option("--export", sw_export, "Directory for per-profile RD curves and comparison.json");
    sw_cmd->add_flag("--no-fallback", sw_no_fallback, "Do not try the all-tools-off pass");
    sw_cmd->callback([&] {
        action = [&] {
            sweep::SweepOptions opt;
            opt.ids = parse_list(sw_profiles);
            opt.qps = parse_int_list(sw_qp, "qp");
            opt.jobs = sw_jobs;
            opt.store = sw_store.empty() ? sweep::default_store_root() : fs::path(sw_store);
            opt.encoder.tool_fallback = !sw_no_fallback;
            if (std::find(opt.ids.begin(), opt.ids.end(), sw_anchor) == opt.ids.end()) opt.ids.insert(opt.ids.begin(), sw_anchor);
            for (const auto& id : opt.ids) profiles::lookup(id);
            if (!sw_export.empty()) fs::create_directories(sw_export);
            const auto content = load_content(sw_content, sw_in, g);

            const auto r = sweep::run_sweep(content, opt);
            for (const auto& c : r.cells)
                if (!c.ok) err << "cell " << c.id << " qp " << c.qp << " failed: " << c.error << '\n';
            const auto cmp = sweep::compare(r, sw_anchor);
            const auto front = pareto::pareto_front(sweep::tradeoff_points(cmp));
            if (!sw_export.empty()) {
                for (const auto& id : r.ids) write_text_file(fs::path(sw_export) / (id + ".json"), bd::to_json(r.series(id)).dump(2) + "\n");
                write_text_file(fs::path(sw_export) / "comparison.json", sweep::to_json(cmp).dump(2) + "\n");
            }
            if (g.json) {
                auto j = sweep::to_json(cmp);
                j["content_digest"] = r.content_digest;
                j["cells"] = r.cells.size();
                j["encodes"] = r.encodes;
                j["store_hits"] = r.store_hits;
                j["failed"] = r.failures();
                j["front"] = nlohmann::json::array();
                for (const auto& p : front) j["front"].push_back(p.id);
                out << j.dump(2) << '\n';
            } else {
                out << "content " << r.content_digest << ": " << r.cells.size() << " cells, " << r.encodes << " encoded, " << r.store_hits
                    << " from store, " << r.failures() << " failed\n";
                sweep::write_text(out, cmp);
                print_front(out, front, false);
            }
            return r.failures() ? kPartial : kOk;
        };
    });

    // pareto
    auto* pa_cmd = app.add_subcommand("pareto", "Pareto front of a comparison (or of the registry's published trade-offs)");
    std::string pa_in;
    pa_cmd->add_option("-i,--input", pa_in, "comparison.json from sweep --export");
    pa_cmd->callback([&] {
        action = [&] {
            std::vector<pareto::TradeoffPoint> pts;
            if (pa_in.empty()) {
                pts = pareto::registry_points();
            } else {
                require_file(pa_in, "input");
                try {
                    pts = sweep::tradeoff_points(sweep::comparison_from_json(nlohmann::json::parse(read_text_file(pa_in))));
                } catch (const nlohmann::json::exception& e) {
                    throw FormatError(pa_in + ": " + e.what());
                }
            }
            if (pts.empty()) throw ValidationError("no trade-off points");
            print_front(out, pareto::pareto_front(pts), g.json);
            return kOk;
        };
    });

    // profiles
    auto* pr_cmd = app.add_subcommand("profiles", "Inspect the configuration registry");
    pr_cmd->require_subcommand(1, 1);
    auto* pr_list = pr_cmd->add_subcommand("list", "All entries");
    std::string pr_id;
    auto* pr_show = pr_cmd->add_subcommand("show", "Composition and published metrics of an entry");
    pr_show->add_option("id", pr_id, "Entry id")->required();
    auto* pr_resolve = pr_cmd->add_subcommand("resolve", "Configuration delta of an entry");
    pr_resolve->add_option("id", pr_id, "Entry id")->required();
    auto* pr_overlay = pr_cmd->add_subcommand("overlay", "External-encoder overlay of an entry");
    pr_overlay->add_option("id", pr_id, "Entry id")->required();

    pr_list->callback([&] {
        action = [&] {
            if (g.json) {
                auto j = nlohmann::json::array();
                for (const auto& e : profiles::registry()) j.push_back({{"id", e.id}, {"kind", kind_name(e.kind)}, {"description", e.description}});
                out << j.dump(2) << '\n';
                return kOk;
            }
            for (const auto& e : profiles::registry()) {
                out << std::left << std::setw(9) << e.id << std::setw(13) << kind_name(e.kind) << std::right;
                if (e.published) out << std::setw(8) << fixed2(e.published->avg_bd_rate) << std::setw(8) << fixed2(e.published->enc_time);
                out << "  " << e.description << '\n';
            }
            return kOk;
        };
    });
    pr_show->callback([&] {
        action = [&] {
            const auto& e = profiles::lookup(pr_id);
            const auto groups = e.kind == profiles::EntryKind::anchor ? std::vector<std::string>{} : profiles::constituent_groups(pr_id);
            if (g.json) {
                nlohmann::json j = {{"id", e.id}, {"kind", kind_name(e.kind)}, {"description", e.description}, {"parts", e.parts}, {"groups", groups}};
                j["delta"] = delta_json(profiles::delta_of(pr_id));
                if (e.published) j["published"] = metrics_json(*e.published);
                out << j.dump(2) << '\n';
                return kOk;
            }
            out << e.id << " (" << kind_name(e.kind) << "): " << e.description << '\n';
            if (!e.parts.empty()) {
                out << "parts:";
                for (const auto& p : e.parts) out << ' ' << p;
                out << '\n';
            }
            if (!groups.empty()) {
                out << "groups:";
                for (const auto& gr : groups) out << ' ' << gr << " (" << profiles::lookup(gr).description << ");";
                out << '\n';
            }
            if (e.published) {
                const auto& m = *e.published;
                out << "published: avg BD-rate " << fixed2(m.avg_bd_rate) << "%, enc time " << fixed2(m.enc_time) << "%, dec time "
                    << fixed2(m.dec_time) << "%\n";
                for (std::size_t i = 0; i < profiles::kDatasets.size(); ++i)
                    out << "  " << std::left << std::setw(12) << profiles::kDatasets[i] << std::right << std::setw(8) << fixed2(m.bd_rate[i]) << '\n';
            }
            return kOk;
        };
    });
    pr_resolve->callback([&] {
        action = [&] {
            const auto r = profiles::resolve(pr_id);
            const auto j = delta_json(r.delta);
            if (g.json) {
                out << j.dump(2) << '\n';
                return kOk;
            }
            out << "disabled:";
            for (const auto& t : j["disabled_tools"]) out << ' ' << t.get<std::string>();
            out << '\n';
            if (r.delta.max_mtt_depth) out << "max_mtt_depth=" << *r.delta.max_mtt_depth << '\n';
            if (r.delta.search_range) out << "search_range=" << *r.delta.search_range << '\n';
            if (r.delta.intra_modes) {
                out << "allowed_intra_modes=";
                const auto modes = r.config.allowed_intra_modes.modes();
                for (std::size_t i = 0; i < modes.size(); ++i) out << (i ? "," : "") << modes[i];
                out << '\n';
            }
            for (const auto& x : r.delta.external_off) out << "external " << x << " off\n";
            return kOk;
        };
    });
    pr_overlay->callback([&] {
        action = [&] {
            out << profiles::resolve(pr_id).overlay;
            return kOk;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return kOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "error: " << e.what() << "\n\n" << app.help();
        return kValidation;
    }
    try {
        return action ? action() : kValidation;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << '\n';
        return kCorrupt;
    } catch (const CorruptionError& e) {
        err << "error: " << e.what() << '\n';
        return kCorrupt;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    }
}

}  // namespace fcm::cli
