// Internal: shared construction path behind reduce_ct / reduce_dt.
#ifndef ROMKIT_BUILD_REDUCTION_HPP
#define ROMKIT_BUILD_REDUCTION_HPP

#include "romkit/experiment.hpp"
#include "romkit/reduction.hpp"

namespace romkit {

Reduction build_reduction(const TrajectoryBatch& excited,
                          const TrajectoryBatch& zero,
                          const DictionarySpec& spec,
                          const ReductionConfig& config, TimeKind kind);

}  // namespace romkit

#endif
