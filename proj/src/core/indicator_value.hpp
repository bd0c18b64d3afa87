#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace resilience {

// Extended real with diagnostics.
struct IndicatorValue {
    enum class Kind { Finite, PosInf, NegInf, Undefined };

    Kind kind = Kind::Undefined;
    double value = std::numeric_limits<double>::quiet_NaN();
    double std_error = std::numeric_limits<double>::quiet_NaN();
    std::size_t samples = 0;
    std::size_t undecided = 0;
    std::vector<std::string> flags;
    std::string reason;
    std::map<std::string, double> extras;

    static IndicatorValue finite(double v);
    static IndicatorValue pos_inf(std::string flag = {});
    static IndicatorValue neg_inf(std::string flag = {});
    static IndicatorValue undefined(std::string why);
    // Maps +-inf doubles to the matching kind, NaN to undefined.
    static IndicatorValue from_double(double v);

    bool is_finite() const { return kind == Kind::Finite; }
    bool is_defined() const { return kind != Kind::Undefined; }
    double as_double() const;
    bool has_flag(const std::string& f) const;
    IndicatorValue& flag(std::string f);

    // Extended-real reciprocal: 1/+inf = 0, 1/0 = +inf.
    IndicatorValue reciprocal() const;
};

}  // namespace resilience
