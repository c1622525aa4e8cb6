#ifndef CTQW_EXPORT_HPP
#define CTQW_EXPORT_HPP

// CSV and JSON writers. Numbers are written with std::to_chars in scientific
// notation with 17 significant digits, so output is locale-independent and
// byte-stable for a fixed input.

#include <charconv>
#include <cstddef>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "closed_form.hpp"
#include "experiments.hpp"
#include "laplace_oracle.hpp"
#include "propagator.hpp"

namespace ctqw {

inline std::string format_number(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 16);
    return std::string(buf, res.ptr);
}

namespace detail {

class CsvRow {
public:
    explicit CsvRow(std::ostream& os) : os_(os) {}
    ~CsvRow() { os_ << '\n'; }
    CsvRow(const CsvRow&) = delete;
    CsvRow& operator=(const CsvRow&) = delete;

    CsvRow& operator<<(double v) { return put(format_number(v)); }
    CsvRow& operator<<(std::size_t v) { return put(std::to_string(v)); }
    CsvRow& operator<<(const std::string& v) { return put(v); }
    CsvRow& operator<<(const char* v) { return put(v); }

private:
    CsvRow& put(const std::string& s)
    {
        if (!first_)
            os_ << ',';
        first_ = false;
        os_ << s;
        return *this;
    }

    std::ostream& os_;
    bool first_ = true;
};

} // namespace detail

/// Columns t,x,re,im,prob; one row per (sample, site) for x < site_limit.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, std::size_t site_limit = SIZE_MAX)
{
    os << "t,x,re,im,prob\n";
    for (const auto& sample : traj.samples) {
        const std::size_t n = std::min(site_limit, sample.size());
        for (std::size_t x = 0; x < n; ++x) {
            const Complex a = sample.values[x];
            detail::CsvRow(os) << sample.time << x << a.real() << a.imag() << std::norm(a);
        }
    }
}

inline nlohmann::json couplings_json(const HoppingPair& g)
{
    return {{"gamma0", g.gamma0()}, {"gamma1", g.gamma1()}};
}

inline nlohmann::json config_json(const WalkConfig& c)
{
    return {{"couplings", couplings_json(c.couplings)},
            {"n_sites", c.topology.size()},
            {"topology", to_string(c.topology.kind())},
            {"dt", c.dt},
            {"t_max", c.t_max},
            {"integrator", to_string(c.integrator)},
            {"record_stride", c.effective_stride()},
            {"record_start", c.record_start},
            {"initial", c.initial ? "custom" : "delta_at_origin"}};
}

/// Run metadata: configuration plus norm drift and boundary-leak monitors.
inline nlohmann::json trajectory_metadata(const Trajectory& traj)
{
    nlohmann::json j = config_json(traj.config);
    j["samples"] = traj.samples.size();
    j["initial_norm"] = traj.initial_norm();
    j["final_norm"] = traj.norm_log.empty() ? 0.0 : traj.norm_log.back();
    j["norm_drift"] = traj.max_norm_drift();
    j["boundary_leak"] = traj.max_leak();
    j["boundary_leak_threshold"] = kLeakThreshold;
    j["truncation_contaminated"] = traj.truncation_contaminated();
    return j;
}

/// Columns x,limit_amplitude_re,limit_amplitude_im,limit_measure for x < cutoff.
inline void write_limit_csv(std::ostream& os, const HoppingPair& g, std::size_t cutoff)
{
    os << "x,limit_amplitude_re,limit_amplitude_im,limit_measure\n";
    for (std::size_t x = 0; x < cutoff; ++x) {
        const Complex a = limiting_amplitude(x, g);
        detail::CsvRow(os) << x << a.real() << a.imag() << limit_measure(x, g);
    }
}

struct OracleRow {
    LaplaceSample numeric;
    Complex closed;

    double abs_error() const { return std::abs(numeric.value - closed); }
};

inline OracleRow compare_with_closed_form(const Trajectory& traj, double s, std::size_t x)
{
    return {numeric_laplace(traj, s, x), laplace_amplitude(x, s, traj.config.couplings)};
}

inline void write_oracle_csv(std::ostream& os, const std::vector<OracleRow>& rows)
{
    os << "s,x,numeric_re,numeric_im,closed_re,closed_im,abs_error,tail_bound\n";
    for (const auto& r : rows)
        detail::CsvRow(os) << r.numeric.s << r.numeric.x << r.numeric.value.real() << r.numeric.value.imag()
                           << r.closed.real() << r.closed.imag() << r.abs_error() << r.numeric.tail_bound;
}

/// Columns gamma0,gamma1,predicted,observed,indicator_value. Rejected points
/// carry "Rejected" in both label columns.
inline void write_sweep_csv(std::ostream& os, const std::vector<PhasePoint>& points)
{
    os << "gamma0,gamma1,predicted,observed,indicator_value\n";
    for (const auto& p : points) {
        if (p.rejection)
            detail::CsvRow(os) << p.gamma0 << p.gamma1 << "Rejected" << "Rejected" << 0.0;
        else
            detail::CsvRow(os) << p.gamma0 << p.gamma1 << to_string(p.predicted) << to_string(p.observed)
                               << p.indicator_value;
    }
}

inline nlohmann::json sweep_summary_json(const std::vector<PhasePoint>& points, const WalkConfig& budget,
                                         const SweepOptions& options, const nlohmann::json& grid_spec)
{
    const SweepSummary s = summarize(points);
    nlohmann::json flags = nlohmann::json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (p.rejection)
            flags.push_back({{"index", i}, {"gamma0", p.gamma0}, {"gamma1", p.gamma1}, {"flag", "rejected"},
                             {"reason", *p.rejection}});
        else if (p.contradiction)
            flags.push_back({{"index", i}, {"gamma0", p.gamma0}, {"gamma1", p.gamma1}, {"flag", "contradiction"},
                             {"indicator_value", p.indicator_value}, {"archived_times", p.archived_times},
                             {"archived_p0", p.archived_p0}});
        else if (p.boundary_leak)
            flags.push_back({{"index", i}, {"gamma0", p.gamma0}, {"gamma1", p.gamma1}, {"flag", "boundary_leak"}});
    }
    nlohmann::json budget_json = config_json(budget);
    budget_json.erase("couplings");
    return {{"grid", grid_spec},
            {"budget", budget_json},
            {"epsilon", options.epsilon},
            {"counts",
             {{"total", s.total},
              {"rejected", s.rejected},
              {"localized", s.localized},
              {"delocalized", s.delocalized},
              {"inconclusive", s.inconclusive},
              {"contradictions", s.contradictions},
              {"boundary_leaks", s.leaks}}},
            {"flags", flags}};
}

inline void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows)
{
    os << "t,p_sim,p_limit\n";
    for (const auto& r : rows)
        detail::CsvRow(os) << r.t << r.p_sim << r.p_limit;
}

/// Columns x,re,im,prob of a single amplitude field.
inline void write_field_csv(std::ostream& os, const AmplitudeField& psi)
{
    os << "x,re,im,prob\n";
    for (std::size_t x = 0; x < psi.size(); ++x)
        detail::CsvRow(os) << x << psi.values[x].real() << psi.values[x].imag() << std::norm(psi.values[x]);
}

} // namespace ctqw

#endif // CTQW_EXPORT_HPP
