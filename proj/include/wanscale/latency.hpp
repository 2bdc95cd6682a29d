// Seeded randomness and the latency distributions used for pod start-up,
// circuit provisioning and route application delays.
#pragma once

#include "wanscale/errors.hpp"
#include "wanscale/rational.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <variant>

namespace wanscale {

// One 64-bit Mersenne Twister with explicit uniform/normal mappings. The
// standard distribution objects are implementation-defined, so they are not
// used anywhere a trace depends on the draw.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

struct ConstantDelay {
    Seconds value;
    friend bool operator==(const ConstantDelay&, const ConstantDelay&) = default;
};
struct UniformDelay {
    Seconds lo;
    Seconds hi;
    friend bool operator==(const UniformDelay&, const UniformDelay&) = default;
};
struct LogNormalDelay {
    Seconds median;
    Rational sigma;
    friend bool operator==(const LogNormalDelay&, const LogNormalDelay&) = default;
};

struct Truncation {
    Seconds lo;
    Seconds hi;
    friend bool operator==(const Truncation&, const Truncation&) = default;
};

// Samples are quantized to 1 ms so that everything downstream stays exact.
class LatencyModel {
public:
    using Distribution = std::variant<ConstantDelay, UniformDelay, LogNormalDelay>;

    static constexpr std::int64_t kResolution = 1000;
    static constexpr int kMaxRejections = 64;

    LatencyModel() : LatencyModel(ConstantDelay{Seconds{0}}) {}
    explicit LatencyModel(Distribution distribution, std::optional<Truncation> truncation = std::nullopt)
        : distribution_(distribution), truncation_(truncation) {
        validate();
    }

    static LatencyModel constant(Seconds v) { return LatencyModel(ConstantDelay{v}); }
    static LatencyModel uniform(Seconds lo, Seconds hi) { return LatencyModel(UniformDelay{lo, hi}); }
    static LatencyModel lognormal(Seconds median, Rational sigma, std::optional<Truncation> t = std::nullopt) {
        return LatencyModel(LogNormalDelay{median, sigma}, t);
    }

    [[nodiscard]] const Distribution& distribution() const noexcept { return distribution_; }
    [[nodiscard]] const std::optional<Truncation>& truncation() const noexcept { return truncation_; }

    Seconds sample(Rng& rng) const {
        for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
            const Seconds s = Rational::from_double(draw(rng)).round_to(kResolution);
            const Seconds clipped = max(s, Seconds{0});
            if (!truncation_ || (clipped >= truncation_->lo && clipped <= truncation_->hi)) return clipped;
        }
        // Rejection kept missing the window; fall back to clamping.
        const Seconds s = max(Rational::from_double(draw(rng)).round_to(kResolution), Seconds{0});
        return min(max(s, truncation_->lo), truncation_->hi);
    }

    friend bool operator==(const LatencyModel&, const LatencyModel&) = default;

private:
    double draw(Rng& rng) const {
        return std::visit(
            [&rng](const auto& d) -> double {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, ConstantDelay>) {
                    return d.value.to_double();
                } else if constexpr (std::is_same_v<T, UniformDelay>) {
                    return d.lo.to_double() + (d.hi - d.lo).to_double() * rng.uniform();
                } else {
                    return d.median.to_double() * std::exp(d.sigma.to_double() * rng.normal());
                }
            },
            distribution_);
    }

    void validate() const {
        std::visit(
            [](const auto& d) {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, ConstantDelay>) {
                    if (d.value < 0) throw ValidationError("latency.value", "must be >= 0");
                } else if constexpr (std::is_same_v<T, UniformDelay>) {
                    if (d.lo < 0 || d.hi < d.lo) throw ValidationError("latency", "uniform bounds must satisfy 0 <= lo <= hi");
                } else {
                    if (d.median <= 0) throw ValidationError("latency.median", "must be positive");
                    if (d.sigma < 0) throw ValidationError("latency.sigma", "must be >= 0");
                }
            },
            distribution_);
        if (truncation_ && (truncation_->lo < 0 || truncation_->hi < truncation_->lo))
            throw ValidationError("latency.truncation", "bounds must satisfy 0 <= lo <= hi");
    }

    Distribution distribution_;
    std::optional<Truncation> truncation_;
};

}  // namespace wanscale
