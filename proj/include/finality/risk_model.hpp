#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace finality {

/// Prospect-theory parameters for the loss branch, plus the behavioral anchor
/// used to calibrate the threshold scale: a transaction worth `anchor_value`
/// dollars is tolerated at revocation probability `anchor_probability`.
struct RiskParams {
    double lambda = 2.25;
    double beta = 0.88;
    double anchor_value = 1.0;
    double anchor_probability = 0.5;
};

/// Throws InvalidArgument naming the first violated field.
void validate(const RiskParams& params);

/// Calibrated loss model. Build with `calibrate`.
struct LossModel {
    RiskParams params;
    double c = 0.0;
};

/// A loss threshold value. Probabilities below 1e-300 saturate to zero with
/// `underflow` set; `log_probability` keeps the exact natural log either way.
struct Threshold {
    double probability = 1.0;
    double log_probability = 0.0;
    bool underflow = false;
};

inline constexpr double kThresholdFloor = 1e-300;

/// L(v) = -lambda * v^beta, with v the loss magnitude in dollars.
double loss(double value, const RiskParams& params);

/// c = L(anchor_value) / ln(anchor_probability), so exp(L(anchor_value)/c) is the anchor probability.
LossModel calibrate(const RiskParams& params);

/// LT(v) = exp(L(v)/c). With the calibrated c this equals
/// anchor_probability^((v/anchor_value)^beta); that form is what gets
/// evaluated, since it is exact at the anchor and independent of lambda.
Threshold threshold(double value, const LossModel& model);

/// Saturated probability from `threshold`.
double loss_threshold(double value, const LossModel& model);

enum class CurveSource { Simulated, PoolModel, Synthetic };

std::string_view to_string(CurveSource source);

/// Revocation probability by confirmation depth, P_rev(d) for d = 1..max_depth.
///
/// Construction clamps sampling noise with a running minimum from shallow to
/// deep, so the stored curve is always non-increasing. Geometric curves carry
/// their ratio and can be evaluated beyond the stored depths.
class RevocationCurve {
public:
    /// `probabilities[i]` is P_rev(i + 1). Values must lie in [0, 1].
    static RevocationCurve from_probabilities(std::vector<double> probabilities,
                                              CurveSource source, double delay);

    /// P_rev(d) = p1^d for d = 1..d_max, extensible past d_max.
    static RevocationCurve geometric(double p1, unsigned d_max, double delay);

    unsigned max_depth() const noexcept { return static_cast<unsigned>(probabilities_.size()); }
    bool extensible() const noexcept { return ratio_.has_value(); }
    std::optional<double> ratio() const noexcept { return ratio_; }
    CurveSource source() const noexcept { return source_; }
    double delay() const noexcept { return delay_; }
    std::span<const double> probabilities() const noexcept { return probabilities_; }

    /// P_rev(depth), 1-based. Beyond max_depth only valid for extensible curves.
    double at(unsigned depth) const;

    /// ln P_rev(depth); -inf for zero probability. Exact for geometric extension.
    double log_at(unsigned depth) const;

private:
    RevocationCurve() = default;

    std::vector<double> probabilities_;
    std::optional<double> ratio_;
    CurveSource source_ = CurveSource::Synthetic;
    double delay_ = 0.0;
};

/// True when P_rev(depth) <= LT (inclusive).
bool depth_satisfies(const RevocationCurve& curve, unsigned depth, const Threshold& lt);

/// Smallest d >= 1 with P_rev(d) <= LT(v), searching d <= d_max. Non-extensible
/// curves are searched only over their observed depths. Returns nullopt when
/// no depth qualifies.
std::optional<unsigned> try_min_confirmation_depth(double value, const RevocationCurve& curve,
                                                   const LossModel& model, unsigned d_max);

/// As above but throws NoDepthSatisfies.
unsigned min_confirmation_depth(double value, const RevocationCurve& curve,
                                const LossModel& model, unsigned d_max);

}  // namespace finality
