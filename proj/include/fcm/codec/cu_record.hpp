#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fcm/codec/config.hpp"
#include "fcm/codec/inter.hpp"
#include "fcm/error.hpp"

namespace fcm::codec {

enum class PredMode : std::uint8_t { intra, inter };
enum class MergeType : std::uint8_t { regular, sbtmvp, affine, geo };

inline std::string_view pred_mode_name(PredMode m) { return m == PredMode::intra ? "intra" : "inter"; }
inline std::string_view merge_type_name(MergeType m) {
    switch (m) {
        case MergeType::regular: return "regular";
        case MergeType::sbtmvp: return "sbtmvp";
        case MergeType::affine: return "affine";
        case MergeType::geo: return "geo";
    }
    return "?";
}

/// Decisions taken for one coding unit.
struct CuRecord {
    int frame = 0;
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;
    int depth = 0;
    int qt_depth = 0;
    int mt_depth = 0;
    PredMode pred_mode = PredMode::intra;
    // intra side (also present for CIIP)
    std::optional<int> intra_mode;
    std::optional<int> mrl_idx;
    std::optional<int> isp_mode;
    // inter side
    bool merge_flag = false;
    bool skip_flag = false;
    std::optional<MergeType> merge_type;
    std::optional<int> merge_idx;
    bool mmvd_flag = false;
    bool imv_flag = false;
    std::optional<int> bcw_idx;
    bool ciip_flag = false;
    std::optional<MotionVector> mv;
    std::optional<int> sbt_idx;
    std::optional<int> sbt_pos;
    // residual
    int mts_idx = 0;
    bool root_cbf = false;
    bool cbf_y = false;
    // sequence/frame level tools as seen by this CU
    bool depquant = false;  // levels coded with dependent quantisation
    bool dbf = false;       // deblocking modified samples on one of its edges
    bool sao = false;       // its CTU carries SAO offsets
    // bit accounting (adaptive model cost of the CU's syntax)
    double bits = 0.0;
    double residual_bits = 0.0;

    bool operator==(const CuRecord&) const = default;
};

using CuRecordSet = std::vector<CuRecord>;

/// True when the record shows `t` doing something: a non-default index,
/// a set flag, or a tool-specific merge type.
inline bool uses_tool(const CuRecord& r, Tool t) {
    switch (t) {
        case Tool::mrl: return r.mrl_idx.value_or(0) > 0;
        case Tool::isp: return r.isp_mode.value_or(0) > 0;
        case Tool::affine: return r.merge_type == MergeType::affine;
        case Tool::sbtmvp: return r.merge_type == MergeType::sbtmvp;
        case Tool::mts: return r.mts_idx > 0;
        case Tool::sbt: return r.sbt_idx.has_value();
        case Tool::depquant: return r.depquant;
        case Tool::bcw: return r.bcw_idx.has_value() && *r.bcw_idx != kBcwDefault;
        case Tool::geo: return r.merge_type == MergeType::geo;
        case Tool::ciip: return r.ciip_flag;
        case Tool::imv: return r.imv_flag;
        case Tool::mmvd: return r.mmvd_flag;
        case Tool::dbf: return r.dbf;
        case Tool::sao: return r.sao;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Field access by column name (CSV export/ingest)

inline const std::vector<std::string>& cu_columns() {
    static const std::vector<std::string> cols = {
        "frame",     "x",         "y",         "width",    "height",   "depth",    "qt_depth", "mt_depth",
        "pred_mode", "intra_mode", "mrl_idx",  "isp_mode", "merge_flag", "skip_flag", "merge_type", "merge_idx",
        "mmvd_flag", "imv_flag",  "bcw_idx",   "ciip_flag", "mv_x",    "mv_y",     "sbt_idx",  "sbt_pos",
        "mts_idx",   "root_cbf",  "cbf_y",     "depquant", "dbf",      "sao",      "bits",     "residual_bits",
    };
    return cols;
}

namespace detail {

inline std::string fmt_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline int parse_int(std::string_view s, std::string_view col) {
    int v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw ValidationError("bad integer '" + std::string(s) + "' in column " + std::string(col));
    return v;
}

inline double parse_double(std::string_view s, std::string_view col) {
    double v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw ValidationError("bad number '" + std::string(s) + "' in column " + std::string(col));
    return v;
}

inline bool parse_bool(std::string_view s, std::string_view col) {
    if (s == "1" || s == "true") return true;
    if (s == "0" || s == "false") return false;
    throw ValidationError("bad flag '" + std::string(s) + "' in column " + std::string(col));
}

inline std::string opt(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

}  // namespace detail

/// Text of one field; absent optionals are empty.
inline std::string cu_field(const CuRecord& r, std::string_view col) {
    auto b = [](bool v) { return std::string(v ? "1" : "0"); };
    if (col == "frame") return std::to_string(r.frame);
    if (col == "x") return std::to_string(r.x);
    if (col == "y") return std::to_string(r.y);
    if (col == "width") return std::to_string(r.width);
    if (col == "height") return std::to_string(r.height);
    if (col == "depth") return std::to_string(r.depth);
    if (col == "qt_depth") return std::to_string(r.qt_depth);
    if (col == "mt_depth") return std::to_string(r.mt_depth);
    if (col == "pred_mode") return std::string(pred_mode_name(r.pred_mode));
    if (col == "intra_mode") return detail::opt(r.intra_mode);
    if (col == "mrl_idx") return detail::opt(r.mrl_idx);
    if (col == "isp_mode") return detail::opt(r.isp_mode);
    if (col == "merge_flag") return b(r.merge_flag);
    if (col == "skip_flag") return b(r.skip_flag);
    if (col == "merge_type") return r.merge_type ? std::string(merge_type_name(*r.merge_type)) : std::string();
    if (col == "merge_idx") return detail::opt(r.merge_idx);
    if (col == "mmvd_flag") return b(r.mmvd_flag);
    if (col == "imv_flag") return b(r.imv_flag);
    if (col == "bcw_idx") return detail::opt(r.bcw_idx);
    if (col == "ciip_flag") return b(r.ciip_flag);
    if (col == "mv_x") return r.mv ? std::to_string(r.mv->x) : std::string();
    if (col == "mv_y") return r.mv ? std::to_string(r.mv->y) : std::string();
    if (col == "sbt_idx") return detail::opt(r.sbt_idx);
    if (col == "sbt_pos") return detail::opt(r.sbt_pos);
    if (col == "mts_idx") return std::to_string(r.mts_idx);
    if (col == "root_cbf") return b(r.root_cbf);
    if (col == "cbf_y") return b(r.cbf_y);
    if (col == "depquant") return b(r.depquant);
    if (col == "dbf") return b(r.dbf);
    if (col == "sao") return b(r.sao);
    if (col == "bits") return detail::fmt_double(r.bits);
    if (col == "residual_bits") return detail::fmt_double(r.residual_bits);
    throw LookupError("unknown CU field '" + std::string(col) + "'");
}

/// Parses `text` into field `col`; empty text leaves optionals absent.
/// Throws ValidationError on malformed values and LookupError on unknown columns.
inline void set_cu_field(CuRecord& r, std::string_view col, std::string_view text) {
    auto i = [&] { return detail::parse_int(text, col); };
    auto b = [&] { return detail::parse_bool(text, col); };
    auto oi = [&](std::optional<int>& o) {
        if (text.empty())
            o.reset();
        else
            o = i();
    };
    auto need = [&] {
        if (text.empty()) throw ValidationError("empty value in column " + std::string(col));
    };
    if (col == "frame") { need(); r.frame = i(); }
    else if (col == "x") { need(); r.x = i(); }
    else if (col == "y") { need(); r.y = i(); }
    else if (col == "width") { need(); r.width = i(); }
    else if (col == "height") { need(); r.height = i(); }
    else if (col == "depth") { if (!text.empty()) r.depth = i(); }
    else if (col == "qt_depth") { if (!text.empty()) r.qt_depth = i(); }
    else if (col == "mt_depth") { if (!text.empty()) r.mt_depth = i(); }
    else if (col == "pred_mode") {
        if (text == "intra" || text == "0" || text == "MODE_INTRA") r.pred_mode = PredMode::intra;
        else if (text == "inter" || text == "1" || text == "MODE_INTER") r.pred_mode = PredMode::inter;
        else if (!text.empty()) throw ValidationError("bad pred_mode '" + std::string(text) + "'");
    }
    else if (col == "intra_mode") oi(r.intra_mode);
    else if (col == "mrl_idx") oi(r.mrl_idx);
    else if (col == "isp_mode") oi(r.isp_mode);
    else if (col == "merge_flag") { if (!text.empty()) r.merge_flag = b(); }
    else if (col == "skip_flag") { if (!text.empty()) r.skip_flag = b(); }
    else if (col == "merge_type") {
        if (text.empty()) r.merge_type.reset();
        else if (text == "regular" || text == "0") r.merge_type = MergeType::regular;
        else if (text == "sbtmvp" || text == "1") r.merge_type = MergeType::sbtmvp;
        else if (text == "affine" || text == "2") r.merge_type = MergeType::affine;
        else if (text == "geo" || text == "3") r.merge_type = MergeType::geo;
        else throw ValidationError("bad merge_type '" + std::string(text) + "'");
    }
    else if (col == "merge_idx") oi(r.merge_idx);
    else if (col == "mmvd_flag") { if (!text.empty()) r.mmvd_flag = b(); }
    else if (col == "imv_flag") { if (!text.empty()) r.imv_flag = b(); }
    else if (col == "bcw_idx") oi(r.bcw_idx);
    else if (col == "ciip_flag") { if (!text.empty()) r.ciip_flag = b(); }
    else if (col == "mv_x" || col == "mv_y") {
        if (text.empty()) {
            r.mv.reset();
        } else {
            if (!r.mv) r.mv = MotionVector{};
            (col == "mv_x" ? r.mv->x : r.mv->y) = i();
        }
    }
    else if (col == "sbt_idx") oi(r.sbt_idx);
    else if (col == "sbt_pos") oi(r.sbt_pos);
    else if (col == "mts_idx") { if (!text.empty()) r.mts_idx = i(); }
    else if (col == "root_cbf") { if (!text.empty()) r.root_cbf = b(); }
    else if (col == "cbf_y") { if (!text.empty()) r.cbf_y = b(); }
    else if (col == "depquant") { if (!text.empty()) r.depquant = b(); }
    else if (col == "dbf") { if (!text.empty()) r.dbf = b(); }
    else if (col == "sao") { if (!text.empty()) r.sao = b(); }
    else if (col == "bits") { if (!text.empty()) r.bits = detail::parse_double(text, col); }
    else if (col == "residual_bits") { if (!text.empty()) r.residual_bits = detail::parse_double(text, col); }
    else throw LookupError("unknown CU field '" + std::string(col) + "'");
}

inline void write_cu_csv(std::ostream& os, const CuRecordSet& records) {
    const auto& cols = cu_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const auto& r : records) {
        for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cu_field(r, cols[i]);
        os << '\n';
    }
}

}  // namespace fcm::codec
