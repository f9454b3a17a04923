#include "fri/report.hpp"

#include <ostream>

#include "fri/format.hpp"

namespace fri {

namespace {

void put_complex(std::ostream& out, Complex x)
{
    out << ',' << format_double(x.real()) << ',' << format_double(x.imag());
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj)
{
    out << "t,lambda_re,lambda_im,lambda_avg_re,lambda_avg_im";
    for (std::size_t i = 0; i < traj.f_series.size(); ++i) out << ",f" << i << "_re,f" << i << "_im";
    out << ",nnz,l1\n";
    for (const auto& r : traj.records) {
        out << r.t;
        put_complex(out, r.lambda);
        put_complex(out, r.lambda_avg);
        for (const auto& f : r.f_values) put_complex(out, f);
        out << ',' << r.nnz << ',' << format_double(r.l1) << '\n';
    }
}

nlohmann::ordered_json summary_json(const EstimateSummary& s)
{
    nlohmann::ordered_json j;
    j["mean"] = {{"re", s.mean.real()}, {"im", s.mean.imag()}};
    j["variance"] = s.variance;
    j["iat"] = s.iat;
    j["ci95_halfwidth"] = s.ci95_halfwidth;
    j["n_samples"] = s.n_samples;
    j["burn_in"] = s.burn_in_used;
    return j;
}

nlohmann::ordered_json summary_document(const std::vector<NamedEstimate>& estimates)
{
    nlohmann::ordered_json doc;
    doc["estimates"] = nlohmann::ordered_json::object();
    for (const auto& e : estimates) doc["estimates"][e.name] = summary_json(e.summary);
    return doc;
}

}  // namespace fri
