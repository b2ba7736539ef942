#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "recsmith/encoder.hpp"
#include "recsmith/models/recommender.hpp"

namespace recsmith {

/// Known model names: pop_rec, query_pop_rec, wilson, ucb, klucb, thompson,
/// item_knn, slim, als, association_rules.
/// Params are validated strictly: an unknown key raises ConfigError, an
/// unknown name UnknownModel.
std::unique_ptr<Recommender> make_model(const std::string& name, const nlohmann::json& params);

/// Versioned little-endian binary model file, magic "RSMH1": model kind,
/// its params, the id encoder and all fitted arrays. Self-contained for
/// prediction (the query/item vocabularies travel with the model).
void save_model(const std::string& path, const Recommender& model,
                const EncoderMapping& mapping);

struct LoadedModel {
    std::unique_ptr<Recommender> model;
    EncoderMapping mapping;
};

LoadedModel load_model(const std::string& path);

}  // namespace recsmith
