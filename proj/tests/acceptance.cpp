// Acceptance run: one PASS/FAIL line per criterion, each with its own
// runtime budget. Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "engine_content.hpp"
#include "fcm/bd_metrics.hpp"
#include "fcm/cli.hpp"
#include "fcm/codec/codec.hpp"
#include "fcm/packer.hpp"
#include "fcm/pareto.hpp"
#include "fcm/profiles.hpp"
#include "fcm/stats.hpp"
#include "fcm/sweep.hpp"
#include "record_content.hpp"

namespace {

using namespace fcm;
namespace fs = std::filesystem;

/// Collects the first few failed expectations of a criterion.
struct Check {
    int failures = 0;
    std::vector<std::string> notes;
    std::string info;

    bool expect(bool ok, const std::string& what) {
        if (!ok) {
            ++failures;
            if (notes.size() < 3) notes.push_back(what);
        }
        return ok;
    }
};

int run_criterion(const std::string& name, double budget_s, const std::function<void(Check&)>& body) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(secs <= budget_s, "over the " + std::to_string(static_cast<int>(budget_s)) + " s budget");
    const bool ok = c.failures == 0;
    std::ostringstream line;
    line << (ok ? "PASS" : "FAIL") << "  " << name << "  [" << std::fixed;
    line.precision(1);
    line << secs << " s / " << budget_s << " s]";
    if (!c.info.empty()) line << "  " << c.info;
    for (const auto& n : c.notes) line << "  | " << n;
    std::cout << line.str() << std::endl;
    return ok ? 0 : 1;
}

std::string str(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// ---------------------------------------------------------------------------

// SFU-A/B SFU-C SFU-D TVD HiEve-1080p HiEve-720p avg enc dec, as published
const char* kPublished =
    "G1 9.83 7.23 6.25 -0.57 1.48 -0.10 4.02 93.11 99.35\n"
    "G2 -3.57 5.98 -3.11 2.25 4.76 0.68 1.16 37.03 99.75\n"
    "G3 -3.05 4.03 1.65 -1.21 0.21 -3.01 -0.23 84.29 99.39\n"
    "G4 9.03 7.10 1.67 3.03 4.40 0.63 4.31 85.52 98.82\n"
    "G5 -2.75 5.33 5.55 -0.61 -0.65 -1.39 0.91 90.50 98.54\n"
    "G6 -14.89 -5.60 9.32 -4.00 -0.19 -2.38 -2.96 78.22 85.51\n"
    "G7 -1.40 8.89 13.28 -2.37 1.05 1.06 3.42 97.87 96.31\n"
    "G8 -2.18 0.79 0.05 1.53 2.90 0.25 0.56 71.20 97.80\n"
    "A -12.34 0.63 1.81 1.65 0.79 -1.78 -1.54 66.93 91.50\n"
    "B -12.76 -0.10 20.12 10.48 3.48 -2.82 3.07 50.56 89.15\n"
    "C -23.39 5.34 11.83 -3.43 0.44 -1.87 -1.85 48.54 90.97\n"
    "D -11.68 -0.34 16.84 11.84 4.51 1.71 3.81 5.55 86.59\n"
    "E -5.54 -1.61 6.09 10.89 1.40 -0.98 1.71 4.34 86.62\n"
    "F -3.56 5.05 4.68 10.23 4.05 -2.59 2.98 4.05 85.39\n"
    "G 0.06 8.25 3.14 9.92 4.01 0.20 4.26 4.51 84.65\n";

void registry_fidelity(Check& c) {
    std::istringstream in(kPublished);
    std::string id;
    int rows = 0;
    while (in >> id) {
        profiles::PublishedMetrics want;
        for (double& v : want.bd_rate) in >> v;
        in >> want.avg_bd_rate >> want.enc_time >> want.dec_time;
        const auto& e = profiles::lookup(id);
        c.expect(e.published && *e.published == want, "row " + id + " differs");
        ++rows;
    }
    c.expect(rows == 15, "expected 15 rows");
    auto spot = [&](const char* id, double avg, double enc) {
        const auto& m = *profiles::lookup(id).published;
        c.expect(m.avg_bd_rate == avg && m.enc_time == enc, std::string("spot row ") + id);
    };
    spot("G6", -2.96, 78.22);
    spot("C", -1.85, 48.54);
    spot("E", 1.71, 4.34);
    spot("F", 2.98, 4.05);
    c.expect(profiles::lookup("G6").published->dec_time == 85.51, "G6 decode time");
    c.expect(profiles::lookup("C").published->bd_rate[0] == -23.39, "C SFU-A/B");
    c.expect(profiles::metrics_checksum() == 0x70edd77b39294831ull, "checksum changed");
    c.expect(profiles::registry().size() == 19, "registry size");
}

void profile_identity(Check& c) {
    using profiles::delta_of;
    for (auto [a, b] : {std::pair{"fast", "G6"}, {"faster", "C"}, {"fastest", "E"}}) {
        c.expect(delta_of(a) == delta_of(b), std::string(a) + " != " + b);
        c.expect(profiles::lookup(a).published == profiles::lookup(b).published, std::string(a) + " metrics");
    }
    const std::vector<std::tuple<const char*, const char*, const char*>> combos = {
        {"A", "G3", "G6"}, {"B", "A", "G8"}, {"C", "B", "G5"}, {"D", "C", "G2"}, {"E", "D", "G7"}, {"F", "E", "G1"}, {"G", "F", "G4"}};
    for (auto [id, x, y] : combos) c.expect(delta_of(id) == (delta_of(x) | delta_of(y)), std::string(id) + " is not the union of its parts");
    profiles::ConfigDelta raw;
    for (const char* g : {"G3", "G6", "G8", "G5", "G2", "G7"}) raw = raw | delta_of(g);
    c.expect(delta_of("E") == raw, "E differs from the raw group union");
    c.expect(delta_of("default").empty(), "default has a delta");
}

// dense trapezoid over the same interpolant, fine enough for 1e-6
double trapezoid(const bd::Pchip& f, double lo, double hi, int n = 100000) {
    const double h = (hi - lo) / n;
    double s = 0.5 * (f(lo) + f(hi));
    for (int i = 1; i < n; ++i) s += f(lo + i * h);
    return s * h;
}

bd::RdCurve make(const std::vector<double>& r, const std::vector<double>& q) {
    bd::RdCurve c{"c", {}};
    for (std::size_t i = 0; i < r.size(); ++i) c.points.push_back({r[i], q[i], 0});
    return c;
}

double quadrature_bd_rate(const bd::RdCurve& a, const bd::RdCurve& t) {
    auto fit = [](const bd::RdCurve& c) {
        std::vector<double> x, y;
        for (const auto& p : bd::validated(c).points) {
            x.push_back(p.quality);
            y.push_back(std::log10(p.rate));
        }
        return bd::Pchip(x, y);
    };
    const auto fa = fit(a), ft = fit(t);
    const double lo = std::max(fa.front(), ft.front()), hi = std::min(fa.back(), ft.back());
    return (std::pow(10.0, (trapezoid(ft, lo, hi) - trapezoid(fa, lo, hi)) / (hi - lo)) - 1.0) * 100.0;
}

void bd_oracles(Check& c) {
    const auto anchor = make({100, 200, 400, 800}, {30, 33, 36, 39});
    const auto test = make({90, 170, 330, 640}, {30, 33, 36, 39});
    c.expect(std::abs(bd::bd_rate(anchor, anchor)) < 1e-9, "identity");
    auto doubled = anchor;
    for (auto& p : doubled.points) p.rate *= 2;
    c.expect(std::abs(bd::bd_rate(anchor, doubled) - 100.0) <= 1e-6, "doubling gave " + str(bd::bd_rate(anchor, doubled)));
    c.expect(std::abs(bd::bd_rate(anchor, test) - quadrature_bd_rate(anchor, test)) <= 1e-6, "closed form vs quadrature");

    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.05, 1.0), scale(1e-3, 1e3);
    auto random_curve = [&] {
        double rate = 50.0 + 1000.0 * u(rng), q = 25.0 + 10.0 * u(rng);
        std::vector<double> rs, qs;
        for (int i = 0; i < 4; ++i) {
            rs.push_back(rate);
            qs.push_back(q);
            rate *= 1.2 + 1.5 * u(rng);
            q += 0.5 + 4.0 * u(rng);
        }
        return make(rs, qs);
    };
    int checked = 0;
    double worst_quad = 0.0;
    while (checked < 500) {
        const auto a = random_curve(), b = random_curve();
        double ab = 0.0, ba = 0.0;
        try {
            ab = bd::bd_rate(a, b);
            ba = bd::bd_rate(b, a);
        } catch (const DomainError&) {
            continue;  // no common quality interval
        }
        ++checked;
        c.expect(std::abs((1 + ab / 100) * (1 + ba / 100) - 1.0) <= 1e-6, "antisymmetry");
        const double k = scale(rng);
        auto as = a, bs = b;
        for (auto& p : as.points) p.rate *= k;
        for (auto& p : bs.points) p.rate *= k;
        c.expect(std::abs(bd::bd_rate(as, bs) - ab) <= 1e-9 * std::max(1.0, std::abs(ab)), "scale invariance");
        const double dq = std::abs(ab - quadrature_bd_rate(a, b));
        worst_quad = std::max(worst_quad, dq);
        c.expect(dq <= 1e-6, "quadrature differs by " + str(dq));
    }
    c.info = "500 curves, worst |closed form - quadrature| " + str(worst_quad);
}

std::vector<pareto::TradeoffPoint> brute_front(const std::vector<pareto::TradeoffPoint>& pts) {
    std::vector<pareto::TradeoffPoint> out;
    for (const auto& p : pts)
        if (std::none_of(pts.begin(), pts.end(), [&](const auto& q) { return pareto::dominates(q, p); })) out.push_back(p);
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
    return out;
}

void pareto_criterion(Check& c) {
    std::vector<std::string> ids;
    for (const auto& p : pareto::pareto_front(pareto::registry_points())) ids.push_back(p.id);
    c.expect(ids == std::vector<std::string>{"F", "E", "G2", "C", "G6"}, "published front differs");
    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 1000);
        const int grid = trial % 2 ? 16 : 1000000;  // half the sets are tie-heavy
        std::vector<pareto::TradeoffPoint> pts;
        for (int i = 0; i < n; ++i)
            pts.push_back({std::to_string(i), 1.0 + static_cast<double>(rng() % grid), static_cast<double>(rng() % grid) - grid / 2.0});
        if (!c.expect(pareto::pareto_front(pts) == brute_front(pts), "random set " + std::to_string(trial))) break;
    }
}

FeatureTensorSet random_set(std::mt19937_64& rng, int kind) {
    auto dim = [&](int hi) { return 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(hi)); };
    FeatureTensorSet s;
    const int n = kind == 1 ? 1 : dim(3), t = kind == 1 ? 1 : dim(2);
    for (int i = 0; i < n; ++i) {
        FeatureTensor x;
        x.id = i + 1;
        x.frames = t;
        x.channels = kind == 1 ? 1 : dim(20);
        x.height = kind == 1 ? 1 : dim(9);
        x.width = kind == 1 ? 1 : dim(9);
        const double scale = std::exp2(static_cast<double>(rng() % 12) - 4.0);
        const double offset = (static_cast<double>(rng() % 200) - 100.0) * scale;
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const double level = u(rng) * scale;
        for (std::size_t k = 0; k < x.element_count(); ++k)
            x.data.push_back(static_cast<float>(kind == 2 ? level : offset + scale * u(rng)));
        s.tensors.push_back(std::move(x));
    }
    return s;
}

void packing_round_trip(Check& c) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const int kind = trial % 10 == 0 ? 1 : trial % 10 == 1 ? 2 : 0;  // single element, constant, general
        const auto s = random_set(rng, kind);
        auto [video, info] = pack(s);
        const auto back = unpack(video, info);
        for (std::size_t n = 0; n < s.tensors.size(); ++n) {
            const auto& l = info.tensors[n];
            const double bound = (l.max_value - l.min_value) / 2046.0;
            for (std::size_t k = 0; k < s.tensors[n].data.size(); ++k) {
                const float v = s.tensors[n].data[k], r = back.tensors[n].data[k];
                const double ulp = std::nextafter(std::abs(r), INFINITY) - std::abs(r);
                if (!c.expect(std::abs(static_cast<double>(r) - v) <= bound + ulp, "set " + std::to_string(trial) + " exceeds bound")) return;
            }
        }
        // scribble over every sample no tile covers
        std::vector<std::uint8_t> covered(video.frame_area(), 0);
        for (const auto& t : info.tensors)
            for (const auto& o : t.tiles)
                for (int y = 0; y < t.height; ++y)
                    for (int x = 0; x < t.width; ++x) covered[(o.y + y) * static_cast<std::size_t>(video.width) + o.x + x] = 1;
        for (auto& f : video.frames)
            for (std::size_t i = 0; i < f.size(); ++i)
                if (!covered[i]) f[i] = static_cast<std::uint16_t>(rng() % 1024);
        c.expect(unpack(video, info) == back, "padding changed set " + std::to_string(trial));
    }
}

void codec_no_drift(Check& c) {
    std::mt19937_64 rng(4242);
    long pixels = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto v = testing::random_video(rng, 128, 128, 3);
        const auto cfg = testing::random_config(rng);
        const auto enc = codec::encode_sequence(v, cfg, {.tool_fallback = rng() % 2 == 0});
        const auto dec = codec::decode_bitstream(enc.bitstream);
        c.expect(dec.video == enc.reconstruction, "trial " + std::to_string(trial) + " drifted");
        c.expect(dec.records.size() == enc.records.size(), "trial " + std::to_string(trial) + " CU count");
        pixels += static_cast<long>(v.width) * v.height * v.frame_count;
    }
    c.info = "100 cases, " + std::to_string(pixels) + " samples";
}

void flag_gating(Check& c) {
    std::mt19937_64 rng(99);
    long cus = 0;
    for (auto t : codec::kAllTools) {
        for (int k = 0; k < 20; ++k) {
            const auto v = testing::random_video(rng, 48, 48, 2);
            auto cfg = testing::random_config(rng);
            if (k % 2 == 0) cfg.tools = codec::ToolSet::all();  // every other tool available
            cfg.enable(t, false);
            const auto enc = codec::encode_sequence(v, cfg, {.tool_fallback = false});
            cus += static_cast<long>(enc.records.size());
            const auto dec = codec::decode_bitstream(enc.bitstream);
            for (const auto* set : {&enc.records, &dec.records})
                for (const auto& r : *set)
                    c.expect(!codec::uses_tool(r, t), std::string(codec::tool_name(t)) + " used while disabled");
        }
    }
    c.info = "280 encodes, " + std::to_string(cus) + " CUs";
}

void dominance(Check& c) {
    int fallbacks = 0, strict = 0;
    for (int s = 0; s < 10; ++s) {
        const auto noise = s % 3 == 2 ? NoiseModel::uniform : NoiseModel::gaussian_blobs;
        const auto v = testing::feature_video(1000 + s, 2, 64, 64, 8 + s, 8 + 2 * (s % 4), noise);
        codec::CodecConfig base;
        base.qp = 22 + 3 * s;
        base.tools = codec::ToolSet{};
        const double j0 = codec::encode_sequence(v, base).cost;
        for (auto t : codec::kAllTools) {
            auto cfg = base;
            cfg.enable(t);
            const auto enc = codec::encode_sequence(v, cfg);
            c.expect(enc.cost <= j0, "content " + std::to_string(s) + " + " + std::string(codec::tool_name(t)) + ": " + str(enc.cost) + " > " + str(j0));
            fallbacks += enc.active.bits() == 0;
            strict += enc.cost < j0;
        }
    }
    c.info = "140 cases, " + std::to_string(strict) + " strictly cheaper, " + std::to_string(fallbacks) + " kept the all-off coding";
}

void rate_monotonicity(Check& c) {
    const std::vector<int> ladder = sweep::kDefaultLadder;
    std::vector<double> mean(ladder.size(), 0.0);
    for (int s = 0; s < 10; ++s) {
        SynthSpec spec;
        spec.family = SynthFamily::custom;
        spec.custom_shapes = {{16, 8, 8}};
        spec.frames = 2;
        spec.seed = 300 + s;
        spec.noise_model = s % 3 == 2 ? NoiseModel::sparse_relu : NoiseModel::gaussian_blobs;
        const auto content = sweep::content_from_tensors(synth_tensor_set(spec), 8);
        for (std::size_t i = 0; i < ladder.size(); ++i) {
            codec::CodecConfig cfg;
            cfg.qp = ladder[i];
            mean[i] += static_cast<double>(codec::encode_sequence(content.video, cfg).bitstream.size()) / 10.0;
        }
    }
    std::ostringstream os;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        os << (i ? ", " : "") << "qp" << ladder[i] << " " << mean[i];
        if (i) c.expect(mean[i] < mean[i - 1], "mean size not decreasing at qp " + std::to_string(ladder[i]));
    }
    c.info = "mean bytes: " + os.str();
}

void stats_criterion(Check& c) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        auto rs = testing::random_records(rng, 1 + static_cast<int>(rng() % 400));
        const auto rep = stats::mode_report(rs);
        for (const auto& h : rep.histograms) {
            if (h.total == 0) continue;
            double sum = 0.0;
            for (const auto& b : h.bins) sum += b.percent;
            c.expect(std::abs(sum - 100.0) < 0.01, "histogram " + h.field + " sums to " + str(sum));
        }
        std::shuffle(rs.begin(), rs.end(), rng);
        c.expect(stats::mode_report(rs) == rep, "permutation changed the report");
        std::stringstream csv;
        codec::write_cu_csv(csv, rs);
        const auto back = stats::ingest_trace_csv(csv, stats::Dialect::native);
        c.expect(back.errors.empty() && back.records == rs, "CSV round trip");
        std::size_t prev = 0;
        for (double t = 0.5; t < 100.0; t += 0.5) {
            const auto cand = stats::skip_candidates(rep, t);
            c.expect(cand.size() >= prev, "skip candidates shrank as the threshold grew");
            prev = cand.size();
            for (const auto& name : cand) c.expect(rep.tool(codec::parse_tool(name))->percent < t, "candidate above threshold");
        }
    }
    auto cfg = profiles::resolve("G1").config;
    cfg.qp = 27;
    const auto enc = codec::encode_sequence(testing::feature_video(8, 2, 64, 64), cfg);
    const auto rep = stats::mode_report(enc.records);
    std::set<std::string> support;
    for (const auto& b : rep.histogram("intra_mode", stats::Population::intra_cu).bins)
        if (b.count > 0) support.insert(b.label);
    std::string s;
    for (const auto& l : support) s += (s.empty() ? "" : ",") + l;
    c.expect(support == std::set<std::string>{"0", "1", "18", "50"}, "G1 intra support {" + s + "}");
    c.info = "G1 intra-mode support {" + s + "} over " + std::to_string(rep.intra_count) + " intra CUs";
}

void end_to_end(Check& c) {
    const auto store = fs::temp_directory_path() / ("fcm_accept_" + std::to_string(::getpid()));
    fs::remove_all(store);
    const std::vector<std::string> args = {"fcmbench", "sweep", "--content", "synth:darknet", "--profiles", "default,G6,fastest",
                                           "--qp", "22,27,32,37", "--store", store.string()};
    auto run = [&](std::vector<std::string> a, std::string& out, std::string& err) {
        std::vector<const char*> argv;
        for (const auto& s : a) argv.push_back(s.c_str());
        std::ostringstream o, e;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
        out = o.str();
        err = e.str();
        return code;
    };
    std::string out, err;
    c.expect(run(args, out, err) == 0, "sweep failed: " + err);
    c.expect(out.find("12 cells, 12 encoded, 0 from store, 0 failed") != std::string::npos, "first run did not encode 12 cells");
    c.expect(out.find("BD-rate vs default (mini-codec scale)") != std::string::npos, "no comparison table");
    const auto front_at = out.find("Pareto front");
    c.expect(front_at != std::string::npos && out.find('\n', front_at) + 1 < out.size(), "no Pareto front");
    std::istringstream lines(out);
    int rows = 0;
    for (std::string l; std::getline(lines, l);)
        for (const char* id : {"default ", "G6 ", "fastest "})
            if (l.rfind(id, 0) == 0) ++rows;
    c.expect(rows == 3, "comparison has " + std::to_string(rows) + " rows");

    auto again_args = args;
    again_args.push_back("--json");
    std::string out2;
    c.expect(run(again_args, out2, err) == 0, "rerun failed: " + err);
    const auto j = nlohmann::json::parse(out2);
    c.expect(j["encodes"] == 0 && j["store_hits"] == 12, "rerun encoded " + j["encodes"].dump() + " cells");
    std::string front;
    for (const auto& id : j["front"]) front += (front.empty() ? "" : ",") + id.get<std::string>();
    c.info = "front {" + front + "}";
    fs::remove_all(store);
}

}  // namespace

int main() {
    int failed = 0;
    failed += run_criterion("registry fidelity", 1, registry_fidelity);
    failed += run_criterion("profile identity", 1, profile_identity);
    failed += run_criterion("BD-rate oracle suite", 10, bd_oracles);
    failed += run_criterion("Pareto front", 5, pareto_criterion);
    failed += run_criterion("packing round trip", 30, packing_round_trip);
    failed += run_criterion("codec no-drift", 300, codec_no_drift);
    failed += run_criterion("flag gating", 300, flag_gating);
    failed += run_criterion("superset-search dominance", 600, dominance);
    failed += run_criterion("rate monotonicity", 120, rate_monotonicity);
    failed += run_criterion("mode statistics", 60, stats_criterion);
    failed += run_criterion("end-to-end smoke", 600, end_to_end);
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << std::endl;
    return failed;
}
