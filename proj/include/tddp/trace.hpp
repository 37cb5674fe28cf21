#ifndef TDDP_TRACE_HPP
#define TDDP_TRACE_HPP

namespace tddp::trace {

// Versioned column manifest for the per-iteration trace table. Consumers
// key on the schema tag; the header row must match kTraceHeader exactly.
// norm_cost is cost divided by the initial iterate's cost. Timing columns
// (t_direction, t_linesearch) are wall-clock and excluded from
// reproducibility guarantees.
inline constexpr const char* kTraceSchema = "tddp-trace-v1";
inline constexpr const char* kTraceHeader =
    "iter,cost,norm_cost,merit,nu,feas_endpoint_l1,feas_dyn_l1,"
    "feas_stage_l1,kkt,alpha,reg,t_direction,t_linesearch";

inline constexpr const char* kCompareSchema = "tddp-compare-v1";
inline constexpr const char* kCompareHeader =
    "variant,status,iters,final_feas,mean_direction_time,min_direction_time";

inline constexpr const char* kCampaignSchema = "tddp-campaign-v1";
inline constexpr const char* kCampaignHeader =
    "formulation,trials,successes,success_rate,mean_iters_success,"
    "mean_final_feas";

}  // namespace tddp::trace

#endif
