#include "levyns/basis_cache.hpp"

#include "levyns/errors.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace levyns {

namespace {

constexpr char kMagic[4] = {'L', 'V', 'N', 'B'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

} // namespace

std::string basis_cache_name(Provider provider, int n_modes, int resolution, int d_space) {
    return std::string(to_string(provider)) + "_n" + std::to_string(n_modes) + "_r" + std::to_string(resolution) +
           "_d" + std::to_string(d_space) + ".lvnb";
}

void save_basis(const BasisSet& basis, const std::filesystem::path& file) {
    const auto tmp = file.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw ConfigError("cannot write basis cache " + tmp);
        os.write(kMagic, 4);
        put(os, kVersion);
        put(os, static_cast<std::uint32_t>(basis.provider()));
        put(os, static_cast<std::uint32_t>(basis.size()));
        put(os, static_cast<std::uint32_t>(basis.grid()->res()));
        put(os, static_cast<std::uint32_t>(basis.dim()));
        os.write(reinterpret_cast<const char*>(basis.eigenvalues().data()),
                 static_cast<std::streamsize>(basis.eigenvalues().size() * sizeof(double)));
        os.write(reinterpret_cast<const char*>(basis.values().data()),
                 static_cast<std::streamsize>(basis.values().size() * sizeof(double)));
        if (!os) throw ConfigError("failed writing basis cache " + tmp);
    }
    std::filesystem::rename(tmp, file);
}

std::optional<BasisSet> load_basis(const std::filesystem::path& file, Provider provider, int n_modes,
                                   int resolution, int d_space) {
    std::ifstream is(file, std::ios::binary);
    if (!is) return std::nullopt;
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw ConfigError("basis cache " + file.string() + " has a bad header");
    const auto version = get<std::uint32_t>(is);
    if (version != kVersion) {
        throw ConfigError("basis cache " + file.string() + " has version " + std::to_string(version) +
                          ", expected " + std::to_string(kVersion));
    }
    const auto prov = get<std::uint32_t>(is);
    const auto n = get<std::uint32_t>(is);
    const auto res = get<std::uint32_t>(is);
    const auto d = get<std::uint32_t>(is);
    if (prov != static_cast<std::uint32_t>(provider) || n != static_cast<std::uint32_t>(n_modes) ||
        res != static_cast<std::uint32_t>(resolution) || d != static_cast<std::uint32_t>(d_space)) {
        throw ConfigError("basis cache " + file.string() + " was written for a different basis");
    }
    auto grid = make_grid(d_space, resolution,
                          provider == Provider::TorusFourier ? Boundary::Periodic : Boundary::Dirichlet);
    std::vector<double> eig(n);
    Eigen::MatrixXd values(grid->node_count() * d_space, n);
    is.read(reinterpret_cast<char*>(eig.data()), static_cast<std::streamsize>(eig.size() * sizeof(double)));
    is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!is) throw ConfigError("basis cache " + file.string() + " is truncated");
    if (provider == Provider::TorusFourier) return build_basis(provider, n_modes, resolution, d_space);
    return BasisSet(provider, std::move(grid), std::move(eig), std::move(values));
}

BasisSet build_basis_cached(Provider provider, int n_modes, int resolution, int d_space,
                            const std::filesystem::path& cache_dir) {
    if (cache_dir.empty() || provider == Provider::TorusFourier) {
        return build_basis(provider, n_modes, resolution, d_space);
    }
    const auto file = cache_dir / basis_cache_name(provider, n_modes, resolution, d_space);
    if (auto cached = load_basis(file, provider, n_modes, resolution, d_space)) return std::move(*cached);
    auto basis = build_basis(provider, n_modes, resolution, d_space);
    std::filesystem::create_directories(cache_dir);
    save_basis(basis, file);
    return basis;
}

} // namespace levyns
