// Collapse-noise model: diffusion rate eta for a mass distribution, the
// rescaled heating parameter Lambda = hbar*eta/(m*omega_m), thermal occupancy,
// and the equivalent occupation n_csl. Momentum-space quadrature is the fast
// path for spheres; a voxel-grid double integral is kept as an independent
// oracle and for arbitrary densities.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "csl/constants.hpp"
#include "csl/errors.hpp"
#include "csl/params.hpp"

namespace csl {

// ---- geometries ----

struct SphereGeometry {
    double radius; // m
    double mass;   // kg
    double density() const {
        return mass / (4.0 / 3.0 * std::numbers::pi * radius * radius * radius);
    }
};

inline SphereGeometry sphere_from_mass(double mass, double density) {
    if (!(mass > 0.0)) throw DomainError("sphere_from_mass: mass must be positive");
    if (!(density > 0.0)) throw DomainError("sphere_from_mass: density must be positive");
    const double volume = mass / density;
    return {std::cbrt(volume * 3.0 / (4.0 * std::numbers::pi)), mass};
}

// Axis-ordered (x, y, z) voxel field of mass density, cubic voxels.
struct DensityGrid {
    std::size_t nx = 0, ny = 0, nz = 0;
    double voxel = 0.0;               // edge length, m
    std::vector<double> values;       // kg/m^3, row-major (x slowest, z fastest)

    double& at(std::size_t i, std::size_t j, std::size_t k) {
        return values[(i * ny + j) * nz + k];
    }
    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return values[(i * ny + j) * nz + k];
    }
    double total_mass() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s * voxel * voxel * voxel;
    }
};

// Binary layout: 3 little-endian uint64 dims, 1 little-endian float64 voxel
// edge (m), then nx*ny*nz row-major float64 values (kg/m^3).
inline void save_density_grid(const DensityGrid& grid, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("save_density_grid: cannot open " + path);
    std::uint64_t dims[3] = {grid.nx, grid.ny, grid.nz};
    f.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    f.write(reinterpret_cast<const char*>(&grid.voxel), sizeof(double));
    f.write(reinterpret_cast<const char*>(grid.values.data()),
            static_cast<std::streamsize>(grid.values.size() * sizeof(double)));
    if (!f) throw IoError("save_density_grid: write failed for " + path);
}

inline DensityGrid load_density_grid(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("load_density_grid: cannot open " + path);
    std::uint64_t dims[3];
    DensityGrid grid;
    f.read(reinterpret_cast<char*>(dims), sizeof(dims));
    f.read(reinterpret_cast<char*>(&grid.voxel), sizeof(double));
    if (!f) throw IoError("load_density_grid: truncated header in " + path);
    grid.nx = dims[0];
    grid.ny = dims[1];
    grid.nz = dims[2];
    if (!(grid.voxel > 0.0)) throw IoError("load_density_grid: nonpositive voxel edge");
    grid.values.resize(grid.nx * grid.ny * grid.nz);
    f.read(reinterpret_cast<char*>(grid.values.data()),
           static_cast<std::streamsize>(grid.values.size() * sizeof(double)));
    if (!f) throw IoError("load_density_grid: truncated payload in " + path);
    return grid;
}

// Voxelizes a homogeneous sphere, antialiasing partial voxels by 4x4x4
// subsampling, then rescales so the grid mass matches geom.mass exactly.
inline DensityGrid rasterize_sphere(const SphereGeometry& geom, double voxel,
                                    std::size_t pad_voxels = 3) {
    if (!(voxel > 0.0)) throw DomainError("rasterize_sphere: voxel must be positive");
    const double rho0 = geom.density();
    const std::size_t half = static_cast<std::size_t>(std::ceil(geom.radius / voxel)) + pad_voxels;
    const std::size_t n = 2 * half;
    DensityGrid grid;
    grid.nx = grid.ny = grid.nz = n;
    grid.voxel = voxel;
    grid.values.assign(n * n * n, 0.0);

    constexpr int ss = 4;
    const double r2 = geom.radius * geom.radius;
    const double center = 0.5 * static_cast<double>(n) * voxel;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                // cheap reject/accept on the voxel's bounding ball
                const double cx = (i + 0.5) * voxel - center;
                const double cy = (j + 0.5) * voxel - center;
                const double cz = (k + 0.5) * voxel - center;
                const double dist = std::sqrt(cx * cx + cy * cy + cz * cz);
                const double halfdiag = 0.5 * std::sqrt(3.0) * voxel;
                if (dist - halfdiag > geom.radius) continue;
                if (dist + halfdiag < geom.radius) {
                    grid.at(i, j, k) = rho0;
                    continue;
                }
                int inside = 0;
                for (int a = 0; a < ss; ++a)
                    for (int b = 0; b < ss; ++b)
                        for (int c = 0; c < ss; ++c) {
                            const double x = cx + ((a + 0.5) / ss - 0.5) * voxel;
                            const double y = cy + ((b + 0.5) / ss - 0.5) * voxel;
                            const double z = cz + ((c + 0.5) / ss - 0.5) * voxel;
                            if (x * x + y * y + z * z <= r2) ++inside;
                        }
                grid.at(i, j, k) = rho0 * inside / double(ss * ss * ss);
            }

    const double got = grid.total_mass();
    if (got <= 0.0) throw DomainError("rasterize_sphere: grid too coarse for the sphere");
    const double fix = geom.mass / got;
    for (double& v : grid.values) v *= fix;
    return grid;
}

// ---- diffusion rate ----

// eta for a homogeneous sphere via the radial momentum-space integral
//   eta = (8 gamma rho0^2 r_c / (3 m0^2)) * Int_0^inf du e^{-u^2}
//         (sin(a u) - a u cos(a u))^2 / u^2,   a = R/r_c.
// Adaptive Gauss-Kronrod to relative tolerance 1e-8.
inline double eta_sphere(const SphereGeometry& geom, double r_c, double gamma) {
    if (!(geom.radius > 0.0) || !(r_c > 0.0) || !(gamma >= 0.0))
        throw DomainError("eta_sphere: radius, r_c must be positive and gamma >= 0");
    const double a = geom.radius / r_c;
    auto integrand = [a](double u) {
        if (u <= 0.0) return 0.0;
        const double au = a * u;
        const double f = std::sin(au) - au * std::cos(au);
        return std::exp(-u * u) * f * f / (u * u);
    };
    double err = 0.0, l1 = 0.0;
    const double upper = 40.0; // integrand carries exp(-u^2)
    const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, 0.0, upper, 14, 1e-10, &err, &l1);
    if (!(integral >= 0.0) || err > 1e-8 * std::max(integral, 1e-300 * l1))
        throw QuadratureFailure("eta_sphere: radial quadrature did not reach 1e-8");
    const double rho0 = geom.density();
    const double m0 = collapse_reference_mass;
    return 8.0 * gamma * rho0 * rho0 * r_c / (3.0 * m0 * m0) * integral;
}

// Same eta from the real-space double integral over a voxel grid:
//   eta = (gamma / (3 m0^2)) Sum_i IntInt d_i rho(r) d_i rho(r')
//         (4 pi r_c^2)^{-3/2} exp(-|r-r'|^2 / (4 r_c^2)) dr dr'.
// Central-difference gradients, separable truncated Gaussian convolution.
// Pure brute force by design: this is the oracle for eta_sphere.
inline double eta_grid(const DensityGrid& grid, double r_c, double gamma,
                       bool periodic = false) {
    const double h = grid.voxel;
    if (!(h > 0.0) || grid.values.empty())
        throw DomainError("eta_grid: empty grid");
    if (h > r_c) throw ResolutionTooCoarse("eta_grid: voxel edge exceeds r_c");

    const std::size_t nx = grid.nx, ny = grid.ny, nz = grid.nz;
    const std::size_t total = nx * ny * nz;
    auto idx = [ny, nz](std::size_t i, std::size_t j, std::size_t k) {
        return (i * ny + j) * nz + k;
    };

    // central differences; outside the box the density is 0 (or wraps)
    auto sample = [&](std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k) -> double {
        if (periodic) {
            auto wrap = [](std::ptrdiff_t v, std::size_t n) {
                std::ptrdiff_t m = v % static_cast<std::ptrdiff_t>(n);
                return static_cast<std::size_t>(m < 0 ? m + static_cast<std::ptrdiff_t>(n) : m);
            };
            return grid.at(wrap(i, nx), wrap(j, ny), wrap(k, nz));
        }
        if (i < 0 || j < 0 || k < 0 || i >= std::ptrdiff_t(nx) ||
            j >= std::ptrdiff_t(ny) || k >= std::ptrdiff_t(nz))
            return 0.0;
        return grid.at(std::size_t(i), std::size_t(j), std::size_t(k));
    };

    std::vector<double> g[3];
    for (auto& v : g) v.assign(total, 0.0);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t k = 0; k < nz; ++k) {
                const auto I = std::ptrdiff_t(i), J = std::ptrdiff_t(j), K = std::ptrdiff_t(k);
                const std::size_t q = idx(i, j, k);
                g[0][q] = (sample(I + 1, J, K) - sample(I - 1, J, K)) / (2 * h);
                g[1][q] = (sample(I, J + 1, K) - sample(I, J - 1, K)) / (2 * h);
                g[2][q] = (sample(I, J, K + 1) - sample(I, J, K - 1)) / (2 * h);
            }

    // 1D taps of the smearing Gaussian, truncated at 6 r_c
    const int w = static_cast<int>(std::ceil(6.0 * r_c / h));
    std::vector<double> tap(2 * w + 1);
    const double norm1d = h / std::sqrt(4.0 * std::numbers::pi * r_c * r_c);
    for (int t = -w; t <= w; ++t)
        tap[std::size_t(t + w)] = norm1d * std::exp(-(t * h) * (t * h) / (4.0 * r_c * r_c));

    auto convolve_axis = [&](std::vector<double>& field, int axis) {
        std::vector<double> out(total, 0.0);
        const std::size_t dim[3] = {nx, ny, nz};
        const std::size_t n = dim[axis];
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < ny; ++j)
                for (std::size_t k = 0; k < nz; ++k) {
                    const double v = field[idx(i, j, k)];
                    if (v == 0.0) continue;
                    const std::size_t pos[3] = {i, j, k};
                    const std::ptrdiff_t p0 = std::ptrdiff_t(pos[axis]);
                    for (int t = -w; t <= w; ++t) {
                        std::ptrdiff_t p = p0 + t;
                        if (periodic) {
                            p %= std::ptrdiff_t(n);
                            if (p < 0) p += std::ptrdiff_t(n);
                        } else if (p < 0 || p >= std::ptrdiff_t(n)) {
                            continue;
                        }
                        std::size_t q[3] = {i, j, k};
                        q[axis] = std::size_t(p);
                        out[idx(q[0], q[1], q[2])] += v * tap[std::size_t(t + w)];
                    }
                }
        field.swap(out);
    };

    double acc = 0.0;
    for (int comp = 0; comp < 3; ++comp) {
        std::vector<double> smoothed = g[comp];
        for (int axis = 0; axis < 3; ++axis) convolve_axis(smoothed, axis);
        for (std::size_t q = 0; q < total; ++q) acc += g[comp][q] * smoothed[q];
    }
    const double m0 = collapse_reference_mass;
    return gamma / (3.0 * m0 * m0) * acc * h * h * h;
}

// ---- occupation numbers and the rescaled parameter ----

inline double thermal_occupation(double omega_m, double temperature) {
    if (!(omega_m > 0.0)) throw DomainError("thermal_occupation: omega_m must be positive");
    if (temperature < 0.0) throw DomainError("thermal_occupation: temperature must be >= 0");
    if (temperature == 0.0) return 0.0;
    const double x = hbar * omega_m / (k_boltzmann * temperature);
    return 1.0 / std::expm1(x);
}

// Lambda = hbar * eta / (m * omega_m), sphere geometry derived from mass and
// material density. (For any other geometry or conversion convention, the
// sweep layer accepts a direct Lambda override that bypasses this one.)
inline double lambda_from_gamma(const SystemParams& p, double gamma) {
    if (gamma < 0.0) throw DomainError("lambda_from_gamma: gamma must be >= 0");
    if (gamma == 0.0) return 0.0;
    const SphereGeometry geom = sphere_from_mass(p.mass, p.material_density);
    return hbar * eta_sphere(geom, p.r_c, gamma) / (p.mass * p.omega_m);
}

inline double n_csl(double n_bar, double lambda, double gamma_m) {
    if (n_bar < 0.0 || lambda < 0.0 || !(gamma_m > 0.0))
        throw DomainError("n_csl: expects n_bar, lambda >= 0 and gamma_m > 0");
    return n_bar + lambda / (2.0 * gamma_m);
}

// Collapse strength at which Lambda equals the thermal decoherence scale
// 2 gamma_m n_bar; single division thanks to Lambda's linearity in gamma.
inline double crossover_gamma(const SystemParams& p) {
    const double slope = lambda_from_gamma(p, 1.0);
    const double n_bar = thermal_occupation(p.omega_m, p.temperature);
    return 2.0 * p.gamma_m * n_bar / slope;
}

} // namespace csl
