#include "levyns/noise.hpp"

#include "levyns/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace levyns {

namespace {

std::vector<double> random_direction(int m, PathRng& rng) {
    std::vector<double> v(m);
    double n2 = 0.0;
    do {
        n2 = 0.0;
        for (auto& x : v) {
            x = rng.normal();
            n2 += x * x;
        }
    } while (n2 == 0.0);
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& x : v) x *= inv;
    return v;
}

void append_poisson_jumps(std::vector<MarkedJump>& out, double rate, double horizon, SizeClass cls, int mark_dim,
                          PathRng& rng, const auto& draw_radius) {
    if (!(rate > 0.0)) return;
    double t = rng.exponential(rate);
    while (t <= horizon) {
        MarkedJump j;
        j.time = t;
        j.size_class = cls;
        j.radius = draw_radius(rng);
        j.mark = random_direction(mark_dim, rng);
        for (auto& x : j.mark) x *= j.radius;
        out.push_back(std::move(j));
        t += rng.exponential(rate);
    }
}

constexpr char kMagic[4] = {'L', 'V', 'N', 'P'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
void put_vec(std::ostream& os, const std::vector<T>& v) {
    put(os, static_cast<std::uint64_t>(v.size()));
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}
template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}
template <class T>
std::vector<T> get_vec(std::istream& is) {
    const auto n = get<std::uint64_t>(is);
    if (!is || n > (std::uint64_t{1} << 32)) throw ConfigError("noise path file is corrupt");
    std::vector<T> v(n);
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
    return v;
}

} // namespace

std::vector<double> sample_brownian(int dim, std::span<const double> schedule, PathRng& rng) {
    if (dim < 0) throw ConfigError("Brownian dimension must be nonnegative");
    std::vector<double> out;
    out.reserve(schedule.size() * dim);
    for (double dt : schedule) {
        if (!(dt > 0.0)) throw ConfigError("Brownian schedule contains a nonpositive step " + std::to_string(dt));
        const double s = std::sqrt(dt);
        for (int i = 0; i < dim; ++i) out.push_back(s * rng.normal());
    }
    return out;
}

JumpSample sample_jumps(const IntensityMeasure& mu, double horizon, double epsilon, PathRng& large_rng,
                        PathRng& small_rng) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw ConfigError("small-jump truncation epsilon must lie in (0, 1), got " + std::to_string(epsilon));
    }
    if (!(horizon > 0.0)) throw ConfigError("jump horizon must be positive");
    JumpSample s;
    const double large = mu.large_total();
    if (!std::isfinite(large)) throw ConfigError("intensity " + mu.name() + " is not integrable on |z| >= 1");
    s.compensator_mass = mu.small_total(epsilon);
    append_poisson_jumps(s.jumps, large, horizon, SizeClass::Large, mu.mark_dim(), large_rng,
                         [&](PathRng& r) { return mu.sample_large_radius(r); });
    append_poisson_jumps(s.jumps, s.compensator_mass, horizon, SizeClass::Small, mu.mark_dim(), small_rng,
                         [&](PathRng& r) { return mu.sample_small_radius(epsilon, r); });
    std::stable_sort(s.jumps.begin(), s.jumps.end(),
                     [](const MarkedJump& a, const MarkedJump& b) { return a.time < b.time; });
    return s;
}

double compensated_increment(std::span<const double> small_jump_values, double dt, double compensator) {
    double s = 0.0;
    for (double v : small_jump_values) s += v;
    return s - dt * compensator;
}

NoisePath NoisePath::generate(const NoiseSpec& spec, double horizon, int n_steps, std::uint64_t seed,
                              std::uint64_t path_index) {
    if (!(horizon > 0.0)) throw ConfigError("time horizon must be positive");
    if (n_steps < 1) throw ConfigError("noise path needs at least one step");
    NoisePath p;
    p.horizon_ = horizon;
    p.n_steps_ = n_steps;
    p.dim_ = spec.brownian_dim;
    p.epsilon_ = spec.epsilon;
    p.seed_ = seed;
    p.path_index_ = path_index;

    if (spec.brownian && spec.brownian_dim > 0) {
        PathRng rng(seed, path_index, Stream::Brownian);
        const std::vector<double> schedule(n_steps, horizon / n_steps);
        p.base_dw_ = sample_brownian(spec.brownian_dim, schedule, rng);
    } else {
        p.base_dw_.assign(static_cast<std::size_t>(n_steps) * spec.brownian_dim, 0.0);
    }
    if (spec.jumps && spec.mu.kind() != IntensityKind::None) {
        PathRng large(seed, path_index, Stream::LargeJumps);
        PathRng small(seed, path_index, Stream::SmallJumps);
        auto js = sample_jumps(spec.mu, horizon, spec.epsilon, large, small);
        p.jumps_ = std::move(js.jumps);
        p.compensator_mass_ = js.compensator_mass;
    }
    PathRng bridge(seed, path_index, Stream::Bridge);
    p.refine(bridge);
    return p;
}

void NoisePath::refine(PathRng& bridge) {
    slice_t0_.clear();
    slice_dt_.clear();
    slice_dw_.clear();
    slice_jump_begin_.clear();
    slice_jump_end_.clear();
    slice_ends_base_.clear();

    std::size_t j = 0;
    std::vector<double> remaining(dim_);
    for (int k = 0; k < n_steps_; ++k) {
        double a = horizon_ * k / n_steps_;
        const double b = horizon_ * (k + 1) / n_steps_;
        for (int i = 0; i < dim_; ++i) remaining[i] = base_dw_[static_cast<std::size_t>(k) * dim_ + i];
        while (true) {
            // next slice end: earliest jump time in (a, b), else b
            double end = b;
            std::size_t jb = j, je = j;
            if (j < jumps_.size() && jumps_[j].time < b) {
                end = jumps_[j].time;
                while (je < jumps_.size() && jumps_[je].time == end) ++je;
            } else {
                while (je < jumps_.size() && jumps_[je].time <= b) ++je;
            }
            slice_t0_.push_back(a);
            slice_dt_.push_back(end - a);
            if (end < b) {
                const double frac = (end - a) / (b - a);
                const double sd = std::sqrt((end - a) * (b - end) / (b - a));
                for (int i = 0; i < dim_; ++i) {
                    const double x = remaining[i] * frac + sd * bridge.normal();
                    slice_dw_.push_back(x);
                    remaining[i] -= x;
                }
            } else {
                for (int i = 0; i < dim_; ++i) slice_dw_.push_back(remaining[i]);
            }
            slice_jump_begin_.push_back(jb);
            slice_jump_end_.push_back(je);
            slice_ends_base_.push_back(end == b ? 1 : 0);
            j = je;
            if (end == b) break;
            a = end;
        }
    }
}

std::span<const double> NoisePath::base_increment(int step) const {
    return {base_dw_.data() + static_cast<std::size_t>(step) * dim_, static_cast<std::size_t>(dim_)};
}

NoiseSlice NoisePath::slice(std::size_t k) const {
    NoiseSlice s;
    s.t0 = slice_t0_.at(k);
    s.dt = slice_dt_[k];
    s.dW = {slice_dw_.data() + k * dim_, static_cast<std::size_t>(dim_)};
    s.jumps = {jumps_.data() + slice_jump_begin_[k], slice_jump_end_[k] - slice_jump_begin_[k]};
    s.ends_base_step = slice_ends_base_[k] != 0;
    return s;
}

NoisePath NoisePath::coarsen(int factor) const {
    if (factor < 1 || n_steps_ % factor != 0) {
        throw UsageError("NoisePath::coarsen: factor " + std::to_string(factor) + " does not divide " +
                         std::to_string(n_steps_) + " steps");
    }
    NoisePath c = *this;
    c.n_steps_ = n_steps_ / factor;
    c.base_dw_.assign(static_cast<std::size_t>(c.n_steps_) * dim_, 0.0);
    for (int k = 0; k < n_steps_; ++k)
        for (int i = 0; i < dim_; ++i)
            c.base_dw_[static_cast<std::size_t>(k / factor) * dim_ + i] += base_dw_[static_cast<std::size_t>(k) * dim_ + i];

    c.slice_t0_.clear();
    c.slice_dt_.clear();
    c.slice_dw_.clear();
    c.slice_jump_begin_.clear();
    c.slice_jump_end_.clear();
    c.slice_ends_base_.clear();
    int fine_base = 0;
    bool open = false;
    std::vector<double> acc(dim_, 0.0);
    for (std::size_t k = 0; k < slice_count(); ++k) {
        if (!open) {
            c.slice_t0_.push_back(slice_t0_[k]);
            std::fill(acc.begin(), acc.end(), 0.0);
            open = true;
        }
        for (int i = 0; i < dim_; ++i) acc[i] += slice_dw_[k * dim_ + i];
        bool closes_base = false;
        if (slice_ends_base_[k]) {
            ++fine_base;
            closes_base = fine_base % factor == 0;
        }
        const bool has_jump = slice_jump_end_[k] > slice_jump_begin_[k];
        if (closes_base || has_jump) {
            const double end = closes_base ? horizon_ * (fine_base / factor) / c.n_steps_ : slice_t0_[k] + slice_dt_[k];
            c.slice_dt_.push_back(end - c.slice_t0_.back());
            for (int i = 0; i < dim_; ++i) c.slice_dw_.push_back(acc[i]);
            c.slice_jump_begin_.push_back(slice_jump_begin_[k]);
            c.slice_jump_end_.push_back(slice_jump_end_[k]);
            c.slice_ends_base_.push_back(closes_base ? 1 : 0);
            open = false;
        }
    }
    return c;
}

NoisePath NoisePath::without(bool drop_brownian, bool drop_jumps) const {
    NoisePath c = *this;
    if (drop_brownian) {
        std::fill(c.base_dw_.begin(), c.base_dw_.end(), 0.0);
        std::fill(c.slice_dw_.begin(), c.slice_dw_.end(), 0.0);
    }
    if (drop_jumps) {
        c.jumps_.clear();
        c.compensator_mass_ = 0.0;
        c.slice_t0_.clear();
        c.slice_dt_.clear();
        c.slice_dw_.clear();
        c.slice_jump_begin_.clear();
        c.slice_jump_end_.clear();
        c.slice_ends_base_.clear();
        std::vector<double> acc(dim_, 0.0);
        bool open = false;
        int base = 0;
        for (std::size_t k = 0; k < slice_count(); ++k) {
            if (!open) {
                c.slice_t0_.push_back(slice_t0_[k]);
                std::fill(acc.begin(), acc.end(), 0.0);
                open = true;
            }
            for (int i = 0; i < dim_; ++i) acc[i] += drop_brownian ? 0.0 : slice_dw_[k * dim_ + i];
            if (slice_ends_base_[k]) {
                ++base;
                c.slice_dt_.push_back(horizon_ * base / n_steps_ - c.slice_t0_.back());
                for (int i = 0; i < dim_; ++i) c.slice_dw_.push_back(acc[i]);
                c.slice_jump_begin_.push_back(0);
                c.slice_jump_end_.push_back(0);
                c.slice_ends_base_.push_back(1);
                open = false;
            }
        }
    }
    return c;
}

std::uint64_t NoisePath::schedule_hash() const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* data, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    mix(&horizon_, sizeof horizon_);
    mix(&n_steps_, sizeof n_steps_);
    mix(&dim_, sizeof dim_);
    return h;
}

void NoisePath::write(const std::filesystem::path& file) const {
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write noise path file " + file.string());
    os.write(kMagic, 4);
    put(os, kVersion);
    put(os, seed_);
    put(os, path_index_);
    put(os, epsilon_);
    put(os, schedule_hash());
    put(os, horizon_);
    put(os, static_cast<std::int32_t>(n_steps_));
    put(os, static_cast<std::int32_t>(dim_));
    put(os, compensator_mass_);
    put_vec(os, base_dw_);
    put(os, static_cast<std::uint64_t>(jumps_.size()));
    for (const auto& j : jumps_) {
        put(os, j.time);
        put(os, j.radius);
        put(os, static_cast<std::uint8_t>(j.size_class == SizeClass::Large));
        put_vec(os, j.mark);
    }
    put_vec(os, slice_t0_);
    put_vec(os, slice_dt_);
    put_vec(os, slice_dw_);
    put_vec(os, slice_jump_begin_);
    put_vec(os, slice_jump_end_);
    put_vec(os, slice_ends_base_);
    if (!os) throw ConfigError("failed writing noise path file " + file.string());
}

NoisePath NoisePath::read(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw ConfigError("cannot open noise path file " + file.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw ConfigError(file.string() + " is not a noise path file");
    const auto version = get<std::uint32_t>(is);
    if (version != kVersion) {
        throw ConfigError("noise path file " + file.string() + " has version " + std::to_string(version));
    }
    NoisePath p;
    p.seed_ = get<std::uint64_t>(is);
    p.path_index_ = get<std::uint64_t>(is);
    p.epsilon_ = get<double>(is);
    const auto hash = get<std::uint64_t>(is);
    p.horizon_ = get<double>(is);
    p.n_steps_ = get<std::int32_t>(is);
    p.dim_ = get<std::int32_t>(is);
    p.compensator_mass_ = get<double>(is);
    p.base_dw_ = get_vec<double>(is);
    const auto nj = get<std::uint64_t>(is);
    if (!is || nj > (std::uint64_t{1} << 32)) throw ConfigError("noise path file is corrupt");
    p.jumps_.resize(nj);
    for (auto& j : p.jumps_) {
        j.time = get<double>(is);
        j.radius = get<double>(is);
        j.size_class = get<std::uint8_t>(is) ? SizeClass::Large : SizeClass::Small;
        j.mark = get_vec<double>(is);
    }
    p.slice_t0_ = get_vec<double>(is);
    p.slice_dt_ = get_vec<double>(is);
    p.slice_dw_ = get_vec<double>(is);
    p.slice_jump_begin_ = get_vec<std::size_t>(is);
    p.slice_jump_end_ = get_vec<std::size_t>(is);
    p.slice_ends_base_ = get_vec<char>(is);
    if (!is) throw ConfigError("noise path file " + file.string() + " is truncated");
    if (hash != p.schedule_hash()) throw ConfigError("noise path file " + file.string() + " fails its schedule hash");
    return p;
}

bool NoisePath::operator==(const NoisePath& o) const {
    auto same_jumps = [&] {
        if (jumps_.size() != o.jumps_.size()) return false;
        for (std::size_t i = 0; i < jumps_.size(); ++i) {
            const auto &a = jumps_[i], &b = o.jumps_[i];
            if (a.time != b.time || a.radius != b.radius || a.size_class != b.size_class || a.mark != b.mark)
                return false;
        }
        return true;
    };
    return horizon_ == o.horizon_ && n_steps_ == o.n_steps_ && dim_ == o.dim_ && epsilon_ == o.epsilon_ &&
           seed_ == o.seed_ && path_index_ == o.path_index_ && compensator_mass_ == o.compensator_mass_ &&
           base_dw_ == o.base_dw_ && same_jumps() && slice_t0_ == o.slice_t0_ && slice_dt_ == o.slice_dt_ &&
           slice_dw_ == o.slice_dw_ && slice_jump_begin_ == o.slice_jump_begin_ &&
           slice_jump_end_ == o.slice_jump_end_ && slice_ends_base_ == o.slice_ends_base_;
}

} // namespace levyns
