#pragma once

#include <filesystem>

#include "polaris/corpus.hpp"

namespace polaris {

// Compact columnar binary store for an ingested corpus (resolved structure,
// period assignment, stance labels). Versioned header; format documented in
// docs/corpus-store.md. Bodies are dropped unless store_bodies is set.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path,
                 bool store_bodies = false);

Corpus load_corpus(const std::filesystem::path& path);

}  // namespace polaris
