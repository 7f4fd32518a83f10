#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>
#include <sstream>

#include "engine_content.hpp"
#include "record_content.hpp"
#include "fcm/codec/codec.hpp"
#include "fcm/stats.hpp"

namespace {

using namespace fcm::stats;
using fcm::codec::MergeType;
using fcm::codec::MotionVector;
using fcm::codec::PredMode;
using fcm::testing::random_records;

std::string csv_of(const CuRecordSet& rs) {
    std::ostringstream os;
    fcm::codec::write_cu_csv(os, rs);
    return os.str();
}

// ---- ingestion ------------------------------------------------------------

TEST(Ingest, NativeRoundTrip) {
    std::mt19937_64 rng(1);
    const auto rs = random_records(rng, 500);
    std::istringstream in(csv_of(rs));
    const auto got = ingest_trace_csv(in, Dialect::native);
    EXPECT_TRUE(got.errors.empty());
    EXPECT_TRUE(got.warnings.empty());
    EXPECT_EQ(got.records, rs);
}

TEST(Ingest, EncoderExportRoundTrip) {
    fcm::codec::CodecConfig cfg;
    cfg.qp = 32;
    const auto enc = fcm::codec::encode_sequence(fcm::testing::feature_video(4, 2, 48, 48), cfg);
    std::istringstream in(csv_of(enc.records));
    EXPECT_EQ(ingest_trace_csv(in, Dialect::native).records, enc.records);
}

TEST(Ingest, MalformedRowsAreReportedWithLineNumbers) {
    std::mt19937_64 rng(2);
    const auto rs = random_records(rng, 1000);
    std::istringstream src(csv_of(rs));
    std::string line, text;
    int lineno = 0;
    while (std::getline(src, line)) {
        ++lineno;
        if (lineno == 10) line += ",extra";
        if (lineno == 500) line.replace(0, line.find(','), "x1");  // bad frame
        if (lineno == 1001) line = "1,2,3";
        text += line + "\n";
    }
    std::istringstream in(text);
    const auto got = ingest_trace_csv(in, Dialect::native);
    EXPECT_EQ(got.records.size(), 997u);
    ASSERT_EQ(got.errors.size(), 3u);
    EXPECT_EQ(got.errors[0].line, 10u);
    EXPECT_EQ(got.errors[1].line, 500u);
    EXPECT_EQ(got.errors[2].line, 1001u);
}

TEST(Ingest, MissingMandatoryColumnNamesIt) {
    std::istringstream in("frame,x,y,height\n0,0,0,8\n");
    try {
        ingest_trace_csv(in, Dialect::native);
        FAIL() << "expected FormatError";
    } catch (const fcm::FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("width"), std::string::npos);
    }
    std::istringstream empty("");
    EXPECT_THROW(ingest_trace_csv(empty, Dialect::native), fcm::FormatError);
    std::istringstream blank("\n\n  \n");
    EXPECT_THROW(ingest_trace_csv(blank, Dialect::native), fcm::FormatError);
}

TEST(Ingest, GenericDialectMapsAliases) {
    std::istringstream in(
        "POC;PosX;PosY;W;H;QTDepth;MTTDepth;PredMode;IntraDir;Colour;MergeFlag;Layer\n"
        "0;0;0;16;16;2;0;MODE_INTRA;50;red;0;a\n"
        "1;16;0;8;16;2;1;MODE_INTER;;blue;1;b\n");
    const auto got = ingest_trace_csv(in, Dialect::generic, {{"Layer", "sao"}});
    ASSERT_EQ(got.records.size(), 0u);  // 'a'/'b' are not flags
    EXPECT_EQ(got.errors.size(), 2u);

    std::istringstream in2(
        "POC;PosX;PosY;W;H;QTDepth;MTTDepth;PredMode;IntraDir;Colour;MergeFlag\n"
        "0;0;0;16;16;2;0;MODE_INTRA;50;red;0\n"
        "1;16;0;8;16;2;1;MODE_INTER;;blue;1\n");
    const auto ok = ingest_trace_csv(in2, Dialect::generic);
    ASSERT_EQ(ok.records.size(), 2u);
    ASSERT_EQ(ok.warnings.size(), 1u);
    EXPECT_NE(ok.warnings[0].find("Colour"), std::string::npos);
    EXPECT_EQ(ok.records[0].intra_mode, 50);
    EXPECT_EQ(ok.records[0].depth, 2);
    EXPECT_EQ(ok.records[1].depth, 3);
    EXPECT_EQ(ok.records[1].pred_mode, PredMode::inter);
    EXPECT_FALSE(ok.records[1].intra_mode.has_value());
    EXPECT_TRUE(ok.records[1].merge_flag);
    const auto seen = observed_tools(ok.columns);
    EXPECT_FALSE(seen.has(fcm::codec::Tool::mrl));
}

// ---- mode report ------------------------------------------------------------

TEST(ModeReport, EveryHistogramSumsToHundred) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto rep = mode_report(random_records(rng, 1 + static_cast<int>(rng() % 300)));
        for (const auto& h : rep.histograms) {
            if (h.total == 0) continue;
            double sum = 0;
            for (const auto& b : h.bins) {
                EXPECT_GE(b.count, 0);
                sum += b.percent;
            }
            EXPECT_NEAR(sum, 100.0, 0.01) << h.field;
        }
    }
}

TEST(ModeReport, PermutationInvariant) {
    std::mt19937_64 rng(4);
    auto rs = random_records(rng, 400);
    const auto a = mode_report(rs);
    std::shuffle(rs.begin(), rs.end(), rng);
    EXPECT_EQ(mode_report(rs), a);
}

TEST(ModeReport, MatchesNaiveRecount) {
    std::mt19937_64 rng(5);
    const auto rs = random_records(rng, 777);
    const auto rep = mode_report(rs);
    std::map<std::string, std::int64_t> depth, depth_area, intra, mvlen;
    std::int64_t n_intra = 0, n_inter = 0, affine = 0;
    for (const auto& r : rs) {
        depth[std::to_string(r.depth)]++;
        depth_area[std::to_string(r.depth)] += r.width * r.height;
        if (r.pred_mode == PredMode::intra) {
            ++n_intra;
            intra[std::to_string(*r.intra_mode)]++;
        } else {
            ++n_inter;
            const int m = std::max(std::abs(r.mv->x), std::abs(r.mv->y));
            const int len = static_cast<int>(std::lround(m / 4.0 + 1e-9));
            mvlen[len >= 5 ? "5+" : std::to_string(len)]++;
        }
        affine += r.merge_type == MergeType::affine;
    }
    auto check = [](const Histogram& h, const std::map<std::string, std::int64_t>& want) {
        std::map<std::string, std::int64_t> got;
        for (const auto& b : h.bins) got[b.label] = b.count;
        EXPECT_EQ(got, want) << h.field;
    };
    check(rep.histogram("depth"), depth);
    check(rep.histogram("depth", Population::all_cu, Weighting::area), depth_area);
    check(rep.histogram("intra_mode", Population::intra_cu), intra);
    check(rep.histogram("mv_length", Population::inter_cu), mvlen);
    EXPECT_EQ(rep.intra_count, n_intra);
    EXPECT_EQ(rep.inter_count, n_inter);
    EXPECT_NEAR(rep.tool(fcm::codec::Tool::affine)->percent, 100.0 * affine / 777.0, 1e-9);
    // the all-CU intra-mode view carries inter CUs as "none"
    EXPECT_EQ(rep.histogram("intra_mode", Population::all_cu).bins.back().label, "none");
    EXPECT_EQ(rep.histogram("intra_mode", Population::all_cu).bins.back().count, n_inter);
}

TEST(ModeReport, SingleCu) {
    CuRecord r;
    r.width = r.height = 16;
    r.qt_depth = 2;
    r.depth = 2;
    r.intra_mode = 18;
    const auto rep = mode_report({r});
    const auto& d = rep.histogram("depth");
    ASSERT_EQ(d.bins.size(), 1u);
    EXPECT_EQ(d.bins[0].label, "2");
    EXPECT_DOUBLE_EQ(d.bins[0].percent, 100.0);
    EXPECT_THROW(mode_report({}), fcm::ValidationError);
}

TEST(ModeReport, RestrictedIntraModesStayOnTheirSupport) {
    fcm::codec::CodecConfig cfg;
    cfg.qp = 27;
    cfg.allowed_intra_modes = fcm::codec::IntraModeSet({18, 50});
    const auto enc = fcm::codec::encode_sequence(fcm::testing::feature_video(8, 1, 64, 64), cfg);
    const auto rep = mode_report(enc.records);
    const auto& h = rep.histogram("intra_mode", Population::intra_cu);
    double mass = 0;
    for (const auto& b : h.bins) {
        EXPECT_TRUE(b.label == "0" || b.label == "1" || b.label == "18" || b.label == "50") << b.label;
        mass += b.percent;
    }
    EXPECT_NEAR(mass, 100.0, 0.01);
}

// ---- skip candidates ------------------------------------------------------

ModeReport usage_report(const std::map<std::string, double>& usage) {
    ModeReport rep;
    rep.cu_count = 1000;
    for (auto t : fcm::codec::kAllTools) {
        const std::string name(fcm::codec::tool_name(t));
        const auto it = usage.find(name);
        const double p = it == usage.end() ? 50.0 : it->second;
        rep.tools.push_back({name, static_cast<std::int64_t>(p * 10), p, p});
    }
    return rep;
}

TEST(SkipCandidates, OrderedByUsage) {
    const auto rep = usage_report({{"MMVD", 9.0}, {"MRL", 2.0}, {"CIIP", 4.0}});
    EXPECT_EQ(skip_candidates(rep, 10.0), (std::vector<std::string>{"MRL", "CIIP", "MMVD"}));
}

TEST(SkipCandidates, ThresholdBoundaries) {
    EXPECT_TRUE(skip_candidates(usage_report({{"Affine", 10.0}}), 10.0).empty());
    EXPECT_EQ(skip_candidates(usage_report({{"Affine", 0.5}}), 10.0), std::vector<std::string>{"Affine"});
    EXPECT_EQ(skip_candidates(usage_report({}), 99.99).size(), 14u);
    EXPECT_TRUE(skip_candidates(usage_report({{"Affine", 0.5}}), 1e-9).empty());
    EXPECT_THROW(skip_candidates(usage_report({}), 0.0), fcm::ValidationError);
    EXPECT_THROW(skip_candidates(usage_report({}), 100.0), fcm::ValidationError);
}

TEST(SkipCandidates, MonotoneInThreshold) {
    std::mt19937_64 rng(6);
    const auto rep = mode_report(random_records(rng, 300));
    std::size_t prev = 0;
    for (double t = 0.5; t < 100.0; t += 0.5) {
        const auto c = skip_candidates(rep, t);
        EXPECT_GE(c.size(), prev);
        prev = c.size();
        for (std::size_t i = 1; i < c.size(); ++i) {
            const auto* a = rep.tool(fcm::codec::parse_tool(c[i - 1]));
            const auto* b = rep.tool(fcm::codec::parse_tool(c[i]));
            EXPECT_LE(a->percent, b->percent);
        }
    }
}

// ---- partition maps ---------------------------------------------------------

// Oracle: a pixel is an outline pixel iff it lies on the border of the CU
// containing it.
Pixmap paint_oracle(const CuRecordSet& rs, int w, int h) {
    Pixmap img{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h * 3, kBlankBackground)};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (const auto& r : rs)
                if (x >= r.x && x < r.x + r.width && y >= r.y && y < r.y + r.height) {
                    if (x == r.x || y == r.y || x == r.x + r.width - 1 || y == r.y + r.height - 1)
                        img.set(x, y, r.pred_mode == PredMode::intra ? kIntraOutline : kInterOutline);
                    break;
                }
    return img;
}

TEST(PartitionMap, SingleCuIsOneRectangle) {
    CuRecord r;
    r.width = r.height = 64;
    const auto img = render_partition_map({r}, 0);
    EXPECT_EQ(img.width, 64);
    EXPECT_EQ(img.height, 64);
    int outline = 0;
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) outline += img.at(x, y) == kIntraOutline;
    EXPECT_EQ(outline, 4 * 64 - 4);
    EXPECT_THROW(render_partition_map({r}, 1), fcm::ValidationError);
}

TEST(PartitionMap, QuadSplitMatchesOracle) {
    CuRecordSet rs;
    for (int i = 0; i < 4; ++i) {
        CuRecord r;
        r.x = (i % 2) * 32;
        r.y = (i / 2) * 32;
        r.width = r.height = 32;
        r.qt_depth = r.depth = 1;
        r.pred_mode = i == 3 ? PredMode::inter : PredMode::intra;
        rs.push_back(r);
    }
    const auto img = render_partition_map(rs, 0);
    EXPECT_EQ(img.rgb, paint_oracle(rs, 64, 64).rgb);
}

TEST(PartitionMap, EncodedFrameOutlinesStayInBounds) {
    fcm::codec::CodecConfig cfg;
    const auto v = fcm::testing::feature_video(12, 2, 40, 24);
    const auto enc = fcm::codec::encode_sequence(v, cfg);
    for (int f = 0; f < 2; ++f) {
        CuRecordSet frame;
        for (const auto& r : enc.records)
            if (r.frame == f) frame.push_back(r);
        const auto img = render_partition_map(enc.records, f, &v);
        EXPECT_EQ(img.width, 40);
        EXPECT_EQ(img.height, 24);
        auto oracle = paint_oracle(frame, 40, 24);
        // compare outline positions only; the oracle has a flat background
        for (int y = 0; y < 24; ++y)
            for (int x = 0; x < 40; ++x) {
                const auto o = oracle.at(x, y);
                if (o == kIntraOutline || o == kInterOutline) {
                    EXPECT_EQ(img.at(x, y), o);
                }
            }
    }
    std::ostringstream ppm;
    write_ppm(ppm, render_partition_map(enc.records, 0));
    EXPECT_EQ(ppm.str().substr(0, 3), "P6\n");
}

}  // namespace
