#pragma once

#include <json.hpp>

#include "voterlab/kernel.hpp"
#include "voterlab/typespace.hpp"

namespace voterlab {

using Json = nlohmann::json;

/// {"n": N, "rows": [[...], ...]}
Json kernel_to_json(const Kernel& kernel);
Kernel kernel_from_json(const Json& j);

/// {"labels": [...], "dist": [[...], ...], "weights": [...]}; weights are the
/// mutation measure and may be omitted (zero measure).
Json type_space_to_json(const TypeSpace& space, const MutationMeasure& mu);
TypeSpace type_space_from_json(const Json& j);
MutationMeasure mutation_from_json(const Json& j, const TypeSpace& space);

/// {label: weight} over the positive atoms.
Json measure_to_json(const FiniteMeasure& lambda, const TypeSpace& space);
FiniteMeasure measure_from_json(const Json& j, const TypeSpace& space);

}  // namespace voterlab
