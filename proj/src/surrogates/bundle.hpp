#pragma once

#include "surrogates/hybrid.hpp"
#include "surrogates/nonintrusive.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace romlab {

// Surrogate bundles: a directory holding basis/EIM/weight containers and a
// manifest.json (architecture, normalization stats, provenance). The manifest
// is written with sorted keys and no timings, so identical inputs give
// identical bytes.
void save_hybrid_bundle(const std::string& dir, HybridSurrogate& s,
                        const nlohmann::json& provenance = nlohmann::json::object());
HybridSurrogate load_hybrid_bundle(const std::string& dir, std::shared_ptr<const FomModel> model);

void save_nonintrusive_bundle(const std::string& dir, NonIntrusiveSurrogate& s,
                              const nlohmann::json& provenance = nlohmann::json::object());
NonIntrusiveSurrogate load_nonintrusive_bundle(const std::string& dir);

nlohmann::json scaler_to_json(const nn::Scaler& s);
nn::Scaler scaler_from_json(const nlohmann::json& j);

// Writes JSON with 2-space indentation and a trailing newline.
void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

}  // namespace romlab
