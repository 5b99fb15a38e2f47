#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "strapsim/constituent/features.hpp"

namespace strapsim::ingest {

// Each loader checks the header (SchemaMismatch on a missing column) and
// logs a warning when the row count differs from the published size.

// sepal_length,sepal_width,petal_length,petal_width,species
constituent::FeatureTable load_iris(const std::filesystem::path& path);

// id, nine cytology scores, class. Rows holding "?" are dropped.
constituent::FeatureTable load_breast_cancer(const std::filesystem::path& path);

// City column first, then BigMac (target) and the remaining numeric indicators.
constituent::FeatureTable load_big_mac(const std::filesystem::path& path);

struct Rating {
  std::string user;
  std::string movie;
  double rating = 0.0;
};

// user_id,movie_id,rating
std::vector<Rating> load_ratings(const std::filesystem::path& path);

// movie_id,description,tagline -> (movie_id, "description tagline")
std::vector<std::pair<std::string, std::string>> load_movie_corpus(const std::filesystem::path& path);

// Generic numeric table: `id_column` (may be empty) plus numeric or
// categorical features; categorical columns are one-hot encoded.
constituent::FeatureTable load_feature_table(const std::filesystem::path& path,
                                             const constituent::EncodeOptions& options);

}  // namespace strapsim::ingest
