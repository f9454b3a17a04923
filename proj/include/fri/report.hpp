#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "fri/iterate.hpp"
#include "fri/stats.hpp"

namespace fri {

/// Header t,lambda_re,lambda_im,lambda_avg_re,lambda_avg_im,f<i>_re,f<i>_im,...,nnz,l1
/// followed by one row per record; doubles in shortest round-trip form.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// {mean: {re, im}, variance, iat, ci95_halfwidth, n_samples, burn_in}
nlohmann::ordered_json summary_json(const EstimateSummary& s);

struct NamedEstimate {
    std::string name;
    EstimateSummary summary;
};

/// {"estimates": {name: summary, ...}}
nlohmann::ordered_json summary_document(const std::vector<NamedEstimate>& estimates);

}  // namespace fri
