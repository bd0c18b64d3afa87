#include "indicator_value.hpp"

#include <algorithm>
#include <cmath>

namespace resilience {

IndicatorValue IndicatorValue::finite(double v) {
    IndicatorValue r;
    if (std::isfinite(v)) {
        r.kind = Kind::Finite;
        r.value = v;
        return r;
    }
    return from_double(v);
}

IndicatorValue IndicatorValue::pos_inf(std::string flag) {
    IndicatorValue r;
    r.kind = Kind::PosInf;
    r.value = std::numeric_limits<double>::infinity();
    if (!flag.empty()) r.flags.push_back(std::move(flag));
    return r;
}

IndicatorValue IndicatorValue::neg_inf(std::string flag) {
    IndicatorValue r;
    r.kind = Kind::NegInf;
    r.value = -std::numeric_limits<double>::infinity();
    if (!flag.empty()) r.flags.push_back(std::move(flag));
    return r;
}

IndicatorValue IndicatorValue::undefined(std::string why) {
    IndicatorValue r;
    r.reason = std::move(why);
    return r;
}

IndicatorValue IndicatorValue::from_double(double v) {
    if (std::isnan(v)) return undefined("not a number");
    if (std::isinf(v)) return v > 0 ? pos_inf() : neg_inf();
    return finite(v);
}

double IndicatorValue::as_double() const {
    switch (kind) {
        case Kind::Finite: return value;
        case Kind::PosInf: return std::numeric_limits<double>::infinity();
        case Kind::NegInf: return -std::numeric_limits<double>::infinity();
        case Kind::Undefined: break;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

bool IndicatorValue::has_flag(const std::string& f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
}

IndicatorValue& IndicatorValue::flag(std::string f) {
    if (!has_flag(f)) flags.push_back(std::move(f));
    return *this;
}

IndicatorValue IndicatorValue::reciprocal() const {
    IndicatorValue r = *this;
    switch (kind) {
        case Kind::Undefined: return r;
        case Kind::PosInf:
        case Kind::NegInf:
            r.kind = Kind::Finite;
            r.value = 0.0;
            break;
        case Kind::Finite:
            if (value == 0.0) {
                r.kind = std::signbit(value) ? Kind::NegInf : Kind::PosInf;
                r.value = std::signbit(value) ? -std::numeric_limits<double>::infinity()
                                              : std::numeric_limits<double>::infinity();
            } else {
                r.value = 1.0 / value;
                if (std::isfinite(std_error)) r.std_error = std_error / (value * value);
            }
            break;
    }
    return r;
}

}  // namespace resilience
