/// @file drag.hpp
/// @brief Drag coefficients kappa_pass(h) and kappa_prop(h, lambda) for
/// no-slip and Navier-slip spheres.
///
/// No-slip values come from the exact series. For Navier slip with length
/// beta the passive coefficient follows the series while h >= beta and the
/// logarithmic law
///
///     kappa_pass(h) = kappa(beta) + (A / beta) ln(beta / h),  A = beta kappa(beta),
///
/// below it; the two branches meet continuously at h = beta.
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <tuple>

#include "twosphere/errors.hpp"
#include "twosphere/geometry.hpp"
#include "twosphere/series.hpp"

namespace twosphere {

enum class BcKind { NoSlip, Navier };

/// Boundary condition on both spheres. beta == 0 iff kind == NoSlip.
struct BoundaryCondition {
    BcKind kind = BcKind::NoSlip;
    double beta = 0.0;

    [[nodiscard]] static BoundaryCondition no_slip() noexcept { return {}; }

    /// Navier slip; a zero slip length is the no-slip condition.
    [[nodiscard]] static BoundaryCondition navier(double beta)
    {
        if (!std::isfinite(beta) || beta < 0.0) {
            throw DomainError("BoundaryCondition: slip length must be finite and non-negative");
        }
        return beta == 0.0 ? no_slip() : BoundaryCondition{BcKind::Navier, beta};
    }
};

inline void validate(const BoundaryCondition& bc)
{
    if (bc.kind == BcKind::NoSlip && bc.beta != 0.0) {
        throw DomainError("BoundaryCondition: no-slip requires beta = 0");
    }
    if (bc.kind == BcKind::Navier && (!(bc.beta > 0.0) || !std::isfinite(bc.beta))) {
        throw DomainError("BoundaryCondition: Navier slip requires beta > 0");
    }
    if (bc.kind == BcKind::Navier && bc.beta < kMinSeriesGap) {
        throw DomainError("BoundaryCondition: slip length below the series range (1e-8)");
    }
}

[[nodiscard]] inline std::string to_string(BcKind k)
{
    return k == BcKind::NoSlip ? "no_slip" : "navier";
}

enum class Provenance { ExactSeries, AsymptoticModel };

[[nodiscard]] inline std::string to_string(Provenance p)
{
    return p == Provenance::ExactSeries ? "exact_series" : "asymptotic_model";
}

struct DragCoefficients {
    double h = 0.0;
    double kappa_pass = 0.0;
    double kappa_prop = 0.0;
    Provenance provenance = Provenance::ExactSeries;
};

/// Below this gap kappa_prop is held at its value here. kappa_prop(h)
/// approaches its contact limit linearly in h (about 2e-8 relative
/// at this gap for lambda = 1), while the series cost grows like 1/sqrt(h).
inline constexpr double kPropulsionClampGap = 1e-6;

/// Replacement for the default kappa_prop model; receives (h, lambda, bc).
using PropulsionModel = std::function<double(double, double, const BoundaryCondition&)>;

/// Thread-safe memo of series solutions keyed by (h, truncation). Lookups
/// return the same object a fresh computation would produce.
class SeriesCache {
public:
    explicit SeriesCache(std::size_t capacity = 4096) : capacity_(capacity) {}

    [[nodiscard]] std::shared_ptr<const SeriesSolution> get(double h, const SeriesTruncation& t)
    {
        const Key key{std::bit_cast<std::uint64_t>(h), t.n_max, std::bit_cast<std::uint64_t>(t.tail_tol),
                      t.adaptive, t.hard_cap};
        {
            std::shared_lock lock(mutex_);
            if (auto it = entries_.find(key); it != entries_.end()) {
                return it->second;
            }
        }
        auto sol = std::make_shared<const SeriesSolution>(coefficients_bd(frame_from_gap(h), 1.0, t));
        std::unique_lock lock(mutex_);
        if (entries_.size() >= capacity_) {
            entries_.clear();
        }
        return entries_.emplace(key, std::move(sol)).first->second;
    }

    [[nodiscard]] std::size_t size() const
    {
        std::shared_lock lock(mutex_);
        return entries_.size();
    }

private:
    using Key = std::tuple<std::uint64_t, int, std::uint64_t, bool, int>;

    std::size_t capacity_;
    mutable std::shared_mutex mutex_;
    std::map<Key, std::shared_ptr<const SeriesSolution>> entries_;
};

/// Unified provider of (kappa_pass, kappa_prop). Copies share one cache.
class DragModel {
public:
    explicit DragModel(SeriesTruncation trunc = {}, PropulsionModel propulsion = {},
                       std::shared_ptr<SeriesCache> cache = std::make_shared<SeriesCache>())
        : trunc_(trunc), propulsion_(std::move(propulsion)), cache_(std::move(cache))
    {
        validate(trunc_);
    }

    [[nodiscard]] const SeriesTruncation& truncation() const noexcept { return trunc_; }

    [[nodiscard]] double kappa_pass(double h, const BoundaryCondition& bc) const
    {
        return pass_with_provenance(h, bc).first;
    }

    [[nodiscard]] double kappa_prop(double h, double lambda, const BoundaryCondition& bc) const
    {
        return prop_with_provenance(h, lambda, bc).first;
    }

    /// f_p (1 - kappa_prop): net force pushing the swimmers together.
    [[nodiscard]] double net_propulsion(double h, double lambda, double f_p, const BoundaryCondition& bc) const
    {
        if (!std::isfinite(f_p) || f_p < 0.0) {
            throw DomainError("net_propulsion: f_p must be finite and non-negative");
        }
        if (f_p == 0.0) {
            return 0.0;
        }
        return f_p * (1.0 - kappa_prop(h, lambda, bc));
    }

    [[nodiscard]] DragCoefficients coefficients(double h, double lambda, const BoundaryCondition& bc) const
    {
        const auto [kp, pp] = pass_with_provenance(h, bc);
        const auto [kq, pq] = prop_with_provenance(h, lambda, bc);
        const bool exact = pp == Provenance::ExactSeries && pq == Provenance::ExactSeries;
        return {h, kp, kq, exact ? Provenance::ExactSeries : Provenance::AsymptoticModel};
    }

    /// Passive coefficient with the provenance of the branch that produced it.
    [[nodiscard]] std::pair<double, Provenance> pass_with_provenance(double h, const BoundaryCondition& bc) const
    {
        validate(bc);
        if (!std::isfinite(h) || !(h > 0.0)) {
            throw DomainError("kappa_pass: half-gap must be positive and finite");
        }
        if (bc.kind == BcKind::NoSlip || h >= bc.beta) {
            require_gap(h, "kappa_pass");
            return {passive_drag(*cache_->get(h, trunc_)), Provenance::ExactSeries};
        }
        const double k_beta = passive_drag(*cache_->get(bc.beta, trunc_));
        // A / beta = kappa(beta)
        return {k_beta * (1.0 + std::log(bc.beta / h)), Provenance::AsymptoticModel};
    }

    [[nodiscard]] std::pair<double, Provenance> prop_with_provenance(double h, double lambda,
                                                                    const BoundaryCondition& bc) const
    {
        validate(bc);
        require_positive(lambda, "kappa_prop", "lambda");
        if (!std::isfinite(h) || !(h > 0.0)) {
            throw DomainError("kappa_prop: half-gap must be positive and finite");
        }
        if (propulsion_) {
            return {propulsion_(h, lambda, bc), Provenance::AsymptoticModel};
        }
        const bool clamped = h < kPropulsionClampGap;
        const double h_eval = clamped ? kPropulsionClampGap : h;
        return {kappa_prop_from(*cache_->get(h_eval, trunc_), lambda),
                clamped ? Provenance::AsymptoticModel : Provenance::ExactSeries};
    }

private:
    SeriesTruncation trunc_;
    PropulsionModel propulsion_;
    std::shared_ptr<SeriesCache> cache_;
};

namespace detail {
inline const DragModel& default_drag_model()
{
    static const DragModel model;
    return model;
}
} // namespace detail

[[nodiscard]] inline double kappa_pass(double h, const BoundaryCondition& bc)
{
    return detail::default_drag_model().kappa_pass(h, bc);
}

[[nodiscard]] inline double kappa_prop(double h, double lambda, const BoundaryCondition& bc)
{
    return detail::default_drag_model().kappa_prop(h, lambda, bc);
}

[[nodiscard]] inline double net_propulsion(double h, double lambda, double f_p, const BoundaryCondition& bc)
{
    return detail::default_drag_model().net_propulsion(h, lambda, f_p, bc);
}

} // namespace twosphere
