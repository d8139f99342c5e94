#include "voterlab/json_io.hpp"

#include <stdexcept>

namespace voterlab {

Json kernel_to_json(const Kernel& kernel)
{
    Json rows = Json::array();
    for (std::size_t x = 0; x < kernel.size(); ++x) {
        Json row = Json::array();
        for (std::size_t y = 0; y < kernel.size(); ++y) row.push_back(kernel(static_cast<Site>(x), static_cast<Site>(y)));
        rows.push_back(std::move(row));
    }
    return {{"n", kernel.size()}, {"rows", std::move(rows)}};
}

Kernel kernel_from_json(const Json& j)
{
    const auto n = j.at("n").get<std::size_t>();
    const auto& rows = j.at("rows");
    if (!rows.is_array() || rows.size() != n) throw std::invalid_argument("kernel JSON: rows must list n rows");
    Matrix q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t x = 0; x < n; ++x) {
        if (!rows[x].is_array() || rows[x].size() != n) throw std::invalid_argument("kernel JSON: every row needs n entries");
        for (std::size_t y = 0; y < n; ++y) q(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = rows[x][y].get<double>();
    }
    return Kernel(std::move(q));
}

Json type_space_to_json(const TypeSpace& space, const MutationMeasure& mu)
{
    Json dist = Json::array();
    for (Type a = 0; a < space.size(); ++a) {
        Json row = Json::array();
        for (Type b = 0; b < space.size(); ++b) row.push_back(space.distance(a, b));
        dist.push_back(std::move(row));
    }
    Json out{{"labels", space.labels()}, {"dist", std::move(dist)}};
    if (mu.size() == space.size()) out["weights"] = mu.weights();
    return out;
}

TypeSpace type_space_from_json(const Json& j)
{
    return TypeSpace(j.at("labels").get<std::vector<std::string>>(),
                     j.at("dist").get<std::vector<std::vector<double>>>());
}

MutationMeasure mutation_from_json(const Json& j, const TypeSpace& space)
{
    if (!j.contains("weights")) return MutationMeasure::none(space.size());
    auto w = j.at("weights").get<std::vector<double>>();
    if (w.size() != space.size()) throw std::invalid_argument("type space JSON: weights must match the labels");
    return MutationMeasure(std::move(w));
}

Json measure_to_json(const FiniteMeasure& lambda, const TypeSpace& space)
{
    if (lambda.size() != space.size()) throw std::invalid_argument("measure and type space differ in size");
    Json out = Json::object();
    for (Type a = 0; a < space.size(); ++a)
        if (lambda.weights[a] > 0.0) out[space.label(a)] = lambda.weights[a];
    return out;
}

FiniteMeasure measure_from_json(const Json& j, const TypeSpace& space)
{
    if (!j.is_object()) throw std::invalid_argument("measure JSON must be an object {label: weight}");
    std::vector<double> w(space.size(), 0.0);
    for (const auto& [label, weight] : j.items()) w[space.index_of(label)] = weight.get<double>();
    return FiniteMeasure(std::move(w));
}

}  // namespace voterlab
