#include "nfde/base_flow.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "nfde/errors.hpp"

namespace nfde {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double phase(const std::vector<int>& k, const TorusPoint& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        s += static_cast<double>(k[i]) * x.theta[i];
    }
    return kTwoPi * s;
}

}  // namespace

double wrap_unit(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r = 0.0;  // floor rounding on values just below an integer
    return r;
}

double torus_distance(const TorusPoint& a, const TorusPoint& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch("torus_distance: dimension mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        double u = wrap_unit(a.theta[i] - b.theta[i]);
        d = std::max(d, std::min(u, 1.0 - u));
    }
    return d;
}

TorusFlow::TorusFlow(std::vector<double> freqs) : freqs_(std::move(freqs)) {
    if (freqs_.empty()) throw StructuralError("TorusFlow: dimension must be at least 1");
    for (double f : freqs_) {
        if (!std::isfinite(f)) throw StructuralError("TorusFlow: non-finite frequency");
    }
}

TorusFlow TorusFlow::golden() { return TorusFlow({kGoldenFrequency}); }

TorusPoint TorusFlow::point(std::vector<double> theta) const {
    if (theta.size() != dim()) throw DimensionMismatch("TorusFlow::point: dimension mismatch");
    for (double& v : theta) v = wrap_unit(v);
    return TorusPoint{std::move(theta)};
}

TorusPoint TorusFlow::origin() const { return TorusPoint{std::vector<double>(dim(), 0.0)}; }

TorusPoint TorusFlow::advance(const TorusPoint& p, double t) const {
    if (p.dim() != dim()) throw DimensionMismatch("advance: point and flow dimensions differ");
    TorusPoint out{p.theta};
    for (std::size_t i = 0; i < dim(); ++i) {
        // reduce t * freq first so large t keeps its fractional digits
        out.theta[i] = wrap_unit(p.theta[i] + wrap_unit(t * freqs_[i]));
    }
    return out;
}

TrigPoly::TrigPoly(double constant) : constant_(constant) {}

TrigPoly::TrigPoly(double constant, std::vector<TrigTerm> terms)
    : constant_(constant), terms_(std::move(terms)) {
    if (!std::isfinite(constant_)) throw StructuralError("TrigPoly: non-finite constant");
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (terms_[i].k.size() != terms_.front().k.size()) {
            throw DimensionMismatch("TrigPoly: multi-indices of different lengths");
        }
        if (!std::isfinite(terms_[i].cos_coeff) || !std::isfinite(terms_[i].sin_coeff)) {
            throw StructuralError("TrigPoly: non-finite coefficient");
        }
    }
}

TrigPoly TrigPoly::cosine(std::vector<int> k, double coeff, double constant) {
    return TrigPoly(constant, {TrigTerm{std::move(k), coeff, 0.0}});
}

TrigPoly TrigPoly::sine(std::vector<int> k, double coeff, double constant) {
    return TrigPoly(constant, {TrigTerm{std::move(k), 0.0, coeff}});
}

bool TrigPoly::is_zero() const { return constant_ == 0.0 && is_constant(); }

bool TrigPoly::is_constant() const {
    for (const auto& t : terms_) {
        if (t.cos_coeff != 0.0 || t.sin_coeff != 0.0) return false;
    }
    return true;
}

double TrigPoly::abs_bound() const {
    double b = std::abs(constant_);
    for (const auto& t : terms_) b += std::abs(t.cos_coeff) + std::abs(t.sin_coeff);
    return b;
}

void TrigPoly::check_dim(std::size_t d) const {
    if (!terms_.empty() && terms_.front().k.size() != d) {
        throw DimensionMismatch("TrigPoly: multi-index length " +
                                std::to_string(terms_.front().k.size()) +
                                " does not match torus dimension " + std::to_string(d));
    }
}

double TrigPoly::eval(const TorusPoint& x) const {
    check_dim(x.dim());
    double v = constant_;
    for (const auto& t : terms_) {
        const double ph = phase(t.k, x);
        v += t.cos_coeff * std::cos(ph) + t.sin_coeff * std::sin(ph);
    }
    return v;
}

double TrigPoly::derivative_along_flow(const TorusFlow& flow, const TorusPoint& x) const {
    check_dim(x.dim());
    if (x.dim() != flow.dim()) throw DimensionMismatch("derivative_along_flow: flow dimension");
    double v = 0.0;
    for (const auto& t : terms_) {
        double kv = 0.0;
        for (std::size_t i = 0; i < t.k.size(); ++i) kv += t.k[i] * flow.freqs()[i];
        const double ph = phase(t.k, x);
        v += kTwoPi * kv * (-t.cos_coeff * std::sin(ph) + t.sin_coeff * std::cos(ph));
    }
    return v;
}

TrigPoly TrigPoly::scaled(double factor) const {
    TrigPoly out = *this;
    out.constant_ *= factor;
    for (auto& t : out.terms_) {
        t.cos_coeff *= factor;
        t.sin_coeff *= factor;
    }
    return out;
}

}  // namespace nfde
