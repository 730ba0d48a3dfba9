#include "finality/risk_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "finality/error.hpp"

namespace finality {
namespace {

void require_value(double value) {
    if (!std::isfinite(value) || value < 0.0) {
        throw InvalidArgument("transaction value must be finite and >= 0, got " +
                              std::to_string(value));
    }
}

}  // namespace

void validate(const RiskParams& params) {
    if (!(params.lambda > 0.0) || !std::isfinite(params.lambda))
        throw InvalidArgument("lambda must be finite and > 0");
    if (!(params.beta > 0.0 && params.beta < 1.0))
        throw InvalidArgument("beta must lie in (0, 1)");
    if (!(params.anchor_value > 0.0) || !std::isfinite(params.anchor_value))
        throw InvalidArgument("anchor_value must be finite and > 0");
    if (!(params.anchor_probability > 0.0 && params.anchor_probability < 1.0))
        throw InvalidArgument("anchor_probability must lie in (0, 1)");
}

double loss(double value, const RiskParams& params) {
    require_value(value);
    if (value == 0.0) return 0.0;
    return -params.lambda * std::pow(value, params.beta);
}

LossModel calibrate(const RiskParams& params) {
    validate(params);
    const double c = loss(params.anchor_value, params) / std::log(params.anchor_probability);
    if (!std::isfinite(c) || !(c > 0.0))
        throw InvalidArgument("anchor does not yield a finite positive scale c");
    return LossModel{params, c};
}

Threshold threshold(double value, const LossModel& model) {
    require_value(value);
    const auto& p = model.params;
    if (value == 0.0) return Threshold{1.0, 0.0, false};

    const double exponent = std::pow(value / p.anchor_value, p.beta);
    const double log_lt = std::log(p.anchor_probability) * exponent;
    Threshold t;
    t.log_probability = log_lt;
    if (log_lt < std::log(kThresholdFloor)) {
        t.probability = 0.0;
        t.underflow = true;
    } else {
        t.probability = std::pow(p.anchor_probability, exponent);
    }
    return t;
}

double loss_threshold(double value, const LossModel& model) {
    return threshold(value, model).probability;
}

std::string_view to_string(CurveSource source) {
    switch (source) {
        case CurveSource::Simulated: return "simulated";
        case CurveSource::PoolModel: return "pool-model";
        case CurveSource::Synthetic: return "synthetic";
    }
    return "unknown";
}

RevocationCurve RevocationCurve::from_probabilities(std::vector<double> probabilities,
                                                    CurveSource source, double delay) {
    if (probabilities.empty()) throw InvalidArgument("revocation curve needs at least one depth");
    double running = 1.0;
    for (double& p : probabilities) {
        if (!(p >= 0.0 && p <= 1.0))
            throw InvalidArgument("revocation probability outside [0, 1]: " + std::to_string(p));
        running = std::min(running, p);
        p = running;
    }
    RevocationCurve curve;
    curve.probabilities_ = std::move(probabilities);
    curve.source_ = source;
    curve.delay_ = delay;
    return curve;
}

RevocationCurve RevocationCurve::geometric(double p1, unsigned d_max, double delay) {
    if (!(p1 >= 0.0 && p1 < 1.0))
        throw InvalidArgument("depth-one revocation probability must lie in [0, 1), got " +
                              std::to_string(p1));
    if (d_max == 0) throw InvalidArgument("d_max must be >= 1");
    std::vector<double> probabilities(d_max);
    for (unsigned d = 1; d <= d_max; ++d) probabilities[d - 1] = std::pow(p1, d);
    RevocationCurve curve;
    curve.probabilities_ = std::move(probabilities);
    curve.ratio_ = p1;
    curve.source_ = CurveSource::PoolModel;
    curve.delay_ = delay;
    return curve;
}

double RevocationCurve::at(unsigned depth) const {
    if (depth == 0) throw InvalidArgument("confirmation depth starts at 1");
    if (depth <= max_depth()) return probabilities_[depth - 1];
    if (!ratio_) throw InvalidArgument("depth beyond observed range of a non-extensible curve");
    return std::pow(*ratio_, depth);
}

double RevocationCurve::log_at(unsigned depth) const {
    if (ratio_) {
        if (depth == 0) throw InvalidArgument("confirmation depth starts at 1");
        if (*ratio_ == 0.0) return -std::numeric_limits<double>::infinity();
        return static_cast<double>(depth) * std::log(*ratio_);
    }
    const double p = at(depth);
    return p == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(p);
}

bool depth_satisfies(const RevocationCurve& curve, unsigned depth, const Threshold& lt) {
    if (!lt.underflow) return curve.at(depth) <= lt.probability;
    // Saturated threshold: compare logs so deep geometric terms stay meaningful.
    return curve.log_at(depth) <= lt.log_probability;
}

std::optional<unsigned> try_min_confirmation_depth(double value, const RevocationCurve& curve,
                                                   const LossModel& model, unsigned d_max) {
    if (d_max == 0) throw InvalidArgument("d_max must be >= 1");
    const Threshold lt = threshold(value, model);
    const unsigned limit = curve.extensible() ? d_max : std::min(d_max, curve.max_depth());

    if (curve.extensible() && curve.ratio().value() > 0.0) {
        // d * ln p1 <= ln LT has a closed-form smallest solution; start the scan
        // just below it so deep searches stay cheap.
        const double guess = std::floor(lt.log_probability / std::log(*curve.ratio()));
        unsigned start = guess > 2.0 ? static_cast<unsigned>(std::min<double>(guess - 1.0, limit)) : 1u;
        while (start > 1 && depth_satisfies(curve, start - 1, lt)) --start;
        for (unsigned d = start; d <= limit; ++d)
            if (depth_satisfies(curve, d, lt)) return d;
        return std::nullopt;
    }

    for (unsigned d = 1; d <= limit; ++d)
        if (depth_satisfies(curve, d, lt)) return d;
    return std::nullopt;
}

unsigned min_confirmation_depth(double value, const RevocationCurve& curve, const LossModel& model,
                                unsigned d_max) {
    if (auto d = try_min_confirmation_depth(value, curve, model, d_max)) return *d;
    const unsigned searched = curve.extensible() ? d_max : std::min(d_max, curve.max_depth());
    throw NoDepthSatisfies(value, searched);
}

}  // namespace finality
