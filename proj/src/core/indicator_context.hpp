#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "basin.hpp"
#include "parameter.hpp"
#include "registry.hpp"
#include "run_config.hpp"

namespace resilience {

// Field and attractor from a validated config; `overrides` replace config params.
ModelEntry build_model(const json& cfg, const ParamMap& overrides);

// One model instance with lazily built basin data, evaluated by indicator name.
class IndicatorContext {
public:
    IndicatorContext(const json& cfg, const ParamMap& overrides);

    const ParamMap& params() const noexcept { return params_; }
    const BasinOracle& oracle() const noexcept { return *oracle_; }

    // Names with an "inv_" prefix return the extended-real reciprocal.
    IndicatorValue compute(const std::string& name, std::size_t workers, std::vector<SampleRecord>* dump);

private:
    IndicatorValue evaluate(const std::string& name, std::size_t workers, std::vector<SampleRecord>* dump);
    const ScalarBasin& basin();
    RegionOfInterest roi();
    IntegratorConfig integrator() const;

    const json& cfg_;
    ParamMap params_;
    std::unique_ptr<BasinOracle> oracle_;
    std::optional<ScalarBasin> basin_;
};

Report run_sweep(const json& cfg);
Report run_flowkick(const json& cfg);
Report run_rtip(const json& cfg);

}  // namespace resilience
