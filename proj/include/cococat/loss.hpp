#pragma once

#include "cococat/intensity.hpp"
#include "cococat/random.hpp"
#include "cococat/severity.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cococat {

inline constexpr double kCensored = std::numeric_limits<double>::infinity();

/// Compound Poisson aggregate loss, possibly under an exponentially tilted
/// measure. Tilting by rate theta scales the intensity by Lf(theta) and
/// reweights the severity density by e^{-theta x} / Lf(theta).
struct LossModel {
    IntensityParams intensity;
    SeverityKind severity;
    double tilt_rate = 0.0;
    double laplace_at_tilt = 1.0;

    static LossModel untilted(const IntensityParams& ip, const SeverityKind& sev) {
        return LossModel{ip, sev, 0.0, 1.0};
    }

    bool is_tilted() const { return tilt_rate > 0.0; }

    /// Intensity under this model's measure.
    double intensity_at(double t) const { return laplace_at_tilt * cococat::intensity_at(intensity, t); }
};

/// Tilts `model` by alpha (1 - nu). Tilts compose additively in the rate, so
/// the Laplace factor is always taken from the base severity.
inline LossModel tilt_model(const LossModel& model, double alpha, double nu) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("tilt_model: alpha must be >= 0");
    if (!(nu >= 0.0 && nu <= 1.0)) throw std::invalid_argument("tilt_model: nu must be in [0, 1]");
    LossModel out = model;
    const double extra = alpha * (1.0 - nu);
    if (extra == 0.0) return out;
    out.tilt_rate = model.tilt_rate + extra;
    out.laplace_at_tilt = laplace_transform(model.severity, out.tilt_rate);
    return out;
}

/// The tilted severity when it has a closed form (Exponential(beta + theta)).
inline std::optional<SeverityKind> closed_form_tilted_severity(const LossModel& model) {
    if (const auto* e = std::get_if<ExponentialParams>(&model.severity))
        return SeverityKind{ExponentialParams{e->beta + model.tilt_rate}};
    if (!model.is_tilted()) return model.severity;
    return std::nullopt;
}

/// One loss amount under the model's measure. Tilted draws propose from the
/// base law and accept with probability e^{-theta x}.
inline double sample_severity(const LossModel& model, RandomStream& rng) {
    if (!model.is_tilted()) return sample_untilted(model.severity, rng);
    for (;;) {
        const double x = sample_untilted(model.severity, rng);
        if (rng.uniform() < std::exp(-model.tilt_rate * x)) return x;
    }
}

/// The thinning majorant is taken over at least this many years, so event
/// sequences for different horizons share a common prefix.
inline constexpr double kMajorantHorizon = 64.0;

/// Thinning sampler for a Poisson process with intensity scale * lambda(t).
/// Draws are consumed in the same order whatever the horizon.
class EventClock {
public:
    EventClock(const IntensityParams& ip, double horizon, double scale = 1.0)
        : ip_(ip), scale_(scale), homogeneous_(ip.constant()),
          bound_(scale * intensity_majorant(ip, std::max(horizon, kMajorantHorizon))) {}

    /// Next event time, or +inf once past `horizon`.
    double next(RandomStream& rng, double horizon) {
        if (!(bound_ > 0.0)) return kCensored;
        for (;;) {
            t_ += rng.exponential() / bound_;
            if (t_ > horizon) return kCensored;
            if (homogeneous_ || rng.uniform() * bound_ <= scale_ * intensity_at(ip_, t_)) return t_;
        }
    }

private:
    IntensityParams ip_;
    double scale_;
    bool homogeneous_;
    double bound_;
    double t_ = 0.0;
};

/// Event times of a Poisson process with intensity scale * lambda(t) on
/// [0, horizon], by thinning against a constant majorant.
inline std::vector<double> simulate_event_times(const IntensityParams& ip, double horizon,
                                                RandomStream& rng, double scale = 1.0) {
    if (!(horizon > 0.0)) throw std::invalid_argument("simulate_event_times: horizon must be > 0");
    std::vector<double> times;
    EventClock clock(ip, horizon, scale);
    for (double t = clock.next(rng, horizon); t != kCensored; t = clock.next(rng, horizon))
        times.push_back(t);
    return times;
}

struct LossEvent {
    double time;
    double cumulative;
};

/// Full loss path on [0, horizon] under the model's measure.
inline std::vector<LossEvent> simulate_loss_path(const LossModel& model, double horizon,
                                                 RandomStream& rng) {
    if (!(horizon > 0.0)) throw std::invalid_argument("simulate_loss_path: horizon must be > 0");
    std::vector<LossEvent> path;
    EventClock clock(model.intensity, horizon, model.laplace_at_tilt);
    double total = 0.0;
    // time then severity, interleaved, so a longer horizon only appends events
    for (double t = clock.next(rng, horizon); t != kCensored; t = clock.next(rng, horizon)) {
        total += sample_severity(model, rng);
        path.push_back({t, total});
    }
    return path;
}

/// First time the aggregate loss reaches D on [0, horizon], or kCensored.
/// The whole path is always simulated so randomness consumption does not
/// depend on D.
inline double first_passage_time(const LossModel& model, double D, double horizon,
                                 RandomStream& rng) {
    if (!(D > 0.0)) throw std::invalid_argument("first_passage_time: D must be > 0");
    const auto path = simulate_loss_path(model, horizon, rng);
    for (const auto& e : path)
        if (e.cumulative >= D) return e.time;
    return kCensored;
}

struct MeasureTag {
    enum class Kind { Physical, Tilted } kind = Kind::Physical;
    double nu = 1.0;
    double tilt_rate = 0.0;

    static MeasureTag of(const LossModel& m, double nu = 1.0) {
        if (!m.is_tilted()) return MeasureTag{};
        return MeasureTag{Kind::Tilted, nu, m.tilt_rate};
    }
    std::string label() const {
        if (kind == Kind::Physical) return "physical";
        return "tilted(nu=" + std::to_string(nu) + ")";
    }
};

struct McSettings {
    std::size_t paths = 100000;
    std::uint64_t seed = 20240601;
    std::size_t substreams = 64;
    /// Stream lane; independent samples from one seed use different lanes.
    std::uint64_t lane = 0;
};

/// Empirical first-passage times; censored paths hold kCensored.
struct TriggerSample {
    std::vector<double> taus;
    MeasureTag measure;
    double threshold = 0.0;
    double horizon = 0.0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    std::size_t substreams = 0;

    /// Empirical P(tau <= t).
    double cdf(double t) const {
        if (taus.empty()) return 0.0;
        std::size_t hit = 0;
        for (double tau : taus) hit += (tau <= t) ? 1 : 0;
        return static_cast<double>(hit) / static_cast<double>(taus.size());
    }
    /// Empirical P(tau > t) = P(L_t < D).
    double survival(double t) const { return 1.0 - cdf(t); }
    double censored_fraction() const { return survival(horizon); }

    /// Binomial standard error of the empirical cdf at t.
    double cdf_std_error(double t) const {
        const double p = cdf(t);
        const auto n = static_cast<double>(taus.size());
        return n > 1 ? std::sqrt(p * (1.0 - p) / (n - 1.0)) : 0.0;
    }

    void write_csv(std::ostream& os) const {
        os << "path_id,tau_or_empty,censored_flag\n";
        os.precision(17);
        for (std::size_t i = 0; i < taus.size(); ++i) {
            os << i << ',';
            if (taus[i] != kCensored) os << taus[i];
            os << ',' << (taus[i] == kCensored ? 1 : 0) << '\n';
        }
    }
};

/// First-passage samples for several thresholds from one set of loss paths.
/// Path p uses the stream of its chunk, so results depend only on
/// (seed, paths, substreams) and never on the thresholds or thread count.
inline std::vector<TriggerSample> simulate_triggers(const LossModel& model,
                                                    std::span<const double> thresholds,
                                                    double horizon, const McSettings& mc,
                                                    double nu_tag = 1.0) {
    if (mc.paths < 1) throw std::invalid_argument("simulate_triggers: paths must be >= 1");
    for (double d : thresholds)
        if (!(d > 0.0)) throw std::invalid_argument("simulate_triggers: thresholds must be > 0");
    const std::size_t m = thresholds.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return thresholds[a] < thresholds[b]; });

    std::vector<TriggerSample> out(m);
    for (std::size_t j = 0; j < m; ++j) {
        out[j].taus.assign(mc.paths, kCensored);
        out[j].measure = MeasureTag::of(model, nu_tag);
        out[j].threshold = thresholds[j];
        out[j].horizon = horizon;
        out[j].n_paths = mc.paths;
        out[j].seed = mc.seed;
        out[j].substreams = mc.substreams;
    }
    const std::size_t chunks = std::max<std::size_t>(1, mc.substreams);
    parallel_chunks(mc.paths, chunks, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            // one stream per path: a longer horizon then extends each path without
            // shifting the draws of the paths after it
            RandomStream rng(mc.seed, p, mc.lane);
            const auto path = simulate_loss_path(model, horizon, rng);
            std::size_t next = 0;
            for (const auto& e : path) {
                while (next < m && e.cumulative >= thresholds[order[next]]) {
                    out[order[next]].taus[p] = e.time;
                    ++next;
                }
                if (next == m) break;
            }
        }
    });
    return out;
}

inline TriggerSample trigger_distribution(const LossModel& model, double D, double horizon,
                                          const McSettings& mc, double nu_tag = 1.0) {
    const double thresholds[1] = {D};
    return std::move(simulate_triggers(model, thresholds, horizon, mc, nu_tag).front());
}

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// P(L_t < D) = P(tau > t) estimated from simulated first-passage times.
inline Estimate survival_prob(const LossModel& model, double t, double D, const McSettings& mc) {
    if (!(t >= 0.0)) throw std::invalid_argument("survival_prob: t must be >= 0");
    if (!(D > 0.0)) throw std::invalid_argument("survival_prob: D must be > 0");
    if (t == 0.0 || D == kCensored) return {1.0, 0.0};
    const auto sample = trigger_distribution(model, D, t, mc);
    return {sample.survival(t), sample.cdf_std_error(t)};
}

/// Exact P(L_t < D) for Exponential(beta) severities given Lambda = int_0^t lambda:
/// e^{-Lambda} sum_n Lambda^n / n! F^{n*}(D), with F^{n*} the Erlang(n, beta) cdf.
/// The series stops once the remaining Poisson mass is below 1e-12.
inline double exponential_survival_exact(double cumulative_intensity, double beta, double D) {
    if (!(D > 0.0)) throw std::invalid_argument("exponential_survival_exact: D must be > 0");
    if (cumulative_intensity <= 0.0) return 1.0;
    const double lam = cumulative_intensity;
    double total = 0.0;
    double mass = 0.0;
    for (int n = 0;; ++n) {
        const double w = std::exp(-lam + n * std::log(lam) - std::lgamma(n + 1.0));
        const double conv = (n == 0) ? 1.0 : boost::math::gamma_p(static_cast<double>(n), beta * D);
        total += w * conv;
        mass += w;
        if (n > lam && 1.0 - mass < 1e-12) break;
        if (n > 100000) break;
    }
    return total;
}

}  // namespace cococat
