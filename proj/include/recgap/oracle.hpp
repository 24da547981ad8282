#ifndef RECGAP_ORACLE_HPP_
#define RECGAP_ORACLE_HPP_

#include "recgap/offline_metrics.hpp"

namespace recgap {

/**
 * Direct, unoptimized transcription of the four recall formulas, used to
 * check the optimized path in tests. Calls model.recommend for every trial,
 * rebuilds every profile from the raw interaction list and computes user
 * weights with an explicit double loop. Throws InstanceTooLarge beyond 16
 * users, 16 items or 64 interactions.
 */
double oracle_recall(const InteractionLog& log, const RecModel& model,
                     const MetricConfig& config, const PopularityTable& pop);

}  // namespace recgap

#endif  // RECGAP_ORACLE_HPP_
