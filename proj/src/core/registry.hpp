#pragma once

#include <map>
#include <string>
#include <vector>

#include "attractor.hpp"
#include "vector_field.hpp"

namespace resilience {

struct ModelEntry {
    VectorField field;
    AttractorSpec attractor;  // default reference attractor for the given parameters
};

const std::vector<std::string>& registry_names();

// Unspecified parameters take the model defaults; throws DomainError on unknown
// names or inadmissible parameter values.
ModelEntry registry_get(const std::string& name, const std::map<std::string, double>& params = {});

}  // namespace resilience
