#pragma once

#include "levyns/basis.hpp"

#include <filesystem>
#include <optional>

namespace levyns {

/// File name used for a cached basis, derived from (provider, n, res, d).
std::string basis_cache_name(Provider provider, int n_modes, int resolution, int d_space);

void save_basis(const BasisSet& basis, const std::filesystem::path& file);

/// Returns nullopt when the file is missing; throws ConfigError when it
/// exists but is corrupt or was written for a different key.
std::optional<BasisSet> load_basis(const std::filesystem::path& file, Provider provider, int n_modes,
                                   int resolution, int d_space);

/// build_basis with an on-disk cache for DirichletStokes solves. An empty
/// cache_dir disables caching.
BasisSet build_basis_cached(Provider provider, int n_modes, int resolution, int d_space,
                            const std::filesystem::path& cache_dir);

} // namespace levyns
