#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "cvqkd/bounds_oracle.hpp"
#include "cvqkd/finite_size.hpp"
#include "cvqkd/protocol_sim.hpp"

namespace cvqkd {

inline void to_json(nlohmann::json& j, const KeyRateBreakdown& b) {
    j = {{"entropy_term", b.entropy_term}, {"holevo_term", b.holevo_term},
         {"leak_ec", b.leak_ec},           {"delta_aep", b.delta_aep},
         {"delta_ent", b.delta_ent},       {"pa_term", b.pa_term}};
}

inline void to_json(nlohmann::json& j, const KeyRateReport& r) {
    j = {{"key_length", r.key_length},
         {"rate", r.rate},
         {"eps_rob", r.eps_rob},
         {"breakdown", r.breakdown},
         {"abort_reason", r.abort_reason}};
}

inline void to_json(nlohmann::json& j, const BoundCheckReport& r) {
    j = {{"lemma", r.lemma},
         {"trials", r.trials},
         {"nominal_bound", r.nominal_bound},
         {"observed_frequency", r.observed_frequency},
         {"mc_stderr", r.mc_stderr},
         {"verdict", r.inconclusive ? "inconclusive" : (r.violated ? "violated" : "respected")}};
}

inline void to_json(nlohmann::json& j, const RobustnessEstimate& e) {
    j = {{"abort_frequency", e.abort_frequency},
         {"standard_error", e.standard_error},
         {"trials", e.trials}};
}

/// One line of the line-delimited trial record format.
inline nlohmann::json trial_record(std::uint64_t seed, const TrialOutcome& out) {
    return {{"seed", seed},
            {"passed_pe", out.passed_pe},
            {"passed_ec", out.passed_ec},
            {"key_length", out.key_length},
            {"empirical_entropy", out.empirical_entropy},
            {"norm_x_sq", out.stats.norm_x_sq},
            {"norm_y_sq", out.stats.norm_y_sq},
            {"inner_xy", out.stats.inner_xy}};
}

} // namespace cvqkd
