#pragma once

// Random but self-consistent CU records for statistics tests.

#include <random>

#include "fcm/codec/cu_record.hpp"

namespace fcm::testing {

inline codec::CuRecordSet random_records(std::mt19937_64& rng, int n) {
    auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };
    codec::CuRecordSet out;
    for (int i = 0; i < n; ++i) {
        codec::CuRecord r;
        r.frame = pick(0, 3);
        r.width = 4 << pick(0, 4);
        r.height = 4 << pick(0, 4);
        r.x = pick(0, 15) * 4;
        r.y = pick(0, 15) * 4;
        r.qt_depth = pick(0, 4);
        r.mt_depth = pick(0, 3);
        r.depth = r.qt_depth + r.mt_depth;
        if (rng() % 2) {
            r.pred_mode = codec::PredMode::intra;
            r.intra_mode = pick(0, 66);
            r.mrl_idx = pick(0, 2);
            r.isp_mode = r.mrl_idx == 0 ? pick(0, 2) : 0;
        } else {
            r.pred_mode = codec::PredMode::inter;
            r.merge_flag = rng() % 2;
            r.skip_flag = r.merge_flag && rng() % 2;
            if (r.merge_flag) {
                r.merge_type = static_cast<codec::MergeType>(pick(0, 3));
                r.merge_idx = pick(0, 5);
                r.mmvd_flag = r.merge_type == codec::MergeType::regular && rng() % 4 == 0;
                r.ciip_flag = !r.skip_flag && r.merge_type == codec::MergeType::regular && !r.mmvd_flag && rng() % 4 == 0;
            } else {
                r.imv_flag = rng() % 3 == 0;
                if (rng() % 2) r.bcw_idx = pick(0, 4);
            }
            if (r.ciip_flag) {
                r.intra_mode = 0;
                r.mrl_idx = 0;
                r.isp_mode = 0;
            }
            r.mv = codec::MotionVector{pick(-40, 40), pick(-40, 40)};
            r.root_cbf = !r.skip_flag && rng() % 2;
            if (r.root_cbf && rng() % 3 == 0) {
                r.sbt_idx = pick(0, 1);
                r.sbt_pos = pick(0, 1);
            }
        }
        r.cbf_y = r.pred_mode == codec::PredMode::intra ? static_cast<bool>(rng() % 2) : r.root_cbf;
        if (r.pred_mode == codec::PredMode::intra) r.root_cbf = r.cbf_y;
        r.mts_idx = r.cbf_y ? pick(0, 4) : 0;
        r.depquant = r.cbf_y && rng() % 2;
        r.dbf = rng() % 5 == 0;
        r.sao = rng() % 3 == 0;
        r.bits = static_cast<double>(pick(1, 4000)) / 7.0;
        r.residual_bits = r.skip_flag ? 0.0 : r.bits / 3.0;
        out.push_back(r);
    }
    return out;
}

}  // namespace fcm::testing
