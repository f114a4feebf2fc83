#include "tgrowth/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include "tgrowth/error.hpp"

namespace tgrowth {

namespace {

// FFTW's planner is not reentrant; only fftw_execute_* is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <typename T>
struct FftwDeleter {
  void operator()(T* p) const noexcept { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter<T>>;

template <typename T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

}  // namespace

struct SpectralPlan::Impl {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::size_t real_size = 0;
  std::size_t complex_size = 0;
  int n = 0;
  int dim = 1;
  int half = 0;                 // n / 2 + 1, length of the last stored axis
  std::vector<double> xi0, xi1;  // per-mode wavenumbers along axis 0 and 1

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward != nullptr) fftw_destroy_plan(forward);
    if (backward != nullptr) fftw_destroy_plan(backward);
  }

  // Half-spectrum work arrays sized for this plan.
  struct Scratch {
    FftwBuffer<double> real;
    FftwBuffer<fftw_complex> spec;
  };

  Scratch scratch() const {
    return {fftw_buffer<double>(real_size), fftw_buffer<fftw_complex>(complex_size)};
  }

  void to_spectrum(const Field& f, Scratch& s) const {
    std::copy(f.values().begin(), f.values().end(), s.real.get());
    fftw_execute_dft_r2c(forward, s.real.get(), s.spec.get());
  }

  Field from_spectrum(Scratch& s, const SpatialGrid& grid) const {
    fftw_execute_dft_c2r(backward, s.spec.get(), s.real.get());
    Field out(grid);
    const double scale = 1.0 / static_cast<double>(real_size);
    for (std::size_t i = 0; i < real_size; ++i) out[i] = s.real[i] * scale;
    return out;
  }
};

SpectralPlan::SpectralPlan(const SpatialGrid& grid) : grid_(grid), impl_(std::make_unique<Impl>()) {
  auto& im = *impl_;
  im.n = grid.points_per_axis();
  im.dim = grid.dim();
  im.half = im.n / 2 + 1;
  im.real_size = grid.cell_count();
  im.complex_size = grid.dim() == 1 ? static_cast<std::size_t>(im.half)
                                    : static_cast<std::size_t>(im.n) * static_cast<std::size_t>(im.half);

  const double k0 = 2.0 * std::numbers::pi / grid.box_length();
  auto signed_index = [n = im.n](int j) { return j <= n / 2 ? j : j - n; };

  im.xi0.resize(im.complex_size);
  im.xi1.assign(im.complex_size, 0.0);
  wave_sq_.resize(im.complex_size);
  if (im.dim == 1) {
    for (int j = 0; j < im.half; ++j) im.xi0[static_cast<std::size_t>(j)] = k0 * j;
  } else {
    for (int r = 0; r < im.n; ++r)
      for (int j = 0; j < im.half; ++j) {
        const auto m = static_cast<std::size_t>(r) * static_cast<std::size_t>(im.half) + static_cast<std::size_t>(j);
        im.xi0[m] = k0 * signed_index(r);
        im.xi1[m] = k0 * j;
      }
  }
  for (std::size_t m = 0; m < im.complex_size; ++m)
    wave_sq_[m] = im.xi0[m] * im.xi0[m] + im.xi1[m] * im.xi1[m];

  auto real = fftw_buffer<double>(im.real_size);
  auto spec = fftw_buffer<fftw_complex>(im.complex_size);
  std::lock_guard lock(planner_mutex());
  // FFTW_ESTIMATE keeps plan selection, and therefore round-off, reproducible.
  if (im.dim == 1) {
    im.forward = fftw_plan_dft_r2c_1d(im.n, real.get(), spec.get(), FFTW_ESTIMATE);
    im.backward = fftw_plan_dft_c2r_1d(im.n, spec.get(), real.get(), FFTW_ESTIMATE);
  } else {
    im.forward = fftw_plan_dft_r2c_2d(im.n, im.n, real.get(), spec.get(), FFTW_ESTIMATE);
    im.backward = fftw_plan_dft_c2r_2d(im.n, im.n, spec.get(), real.get(), FFTW_ESTIMATE);
  }
  if (im.forward == nullptr || im.backward == nullptr) throw Error("FFTW planning failed");
}

SpectralPlan::~SpectralPlan() = default;
SpectralPlan::SpectralPlan(SpectralPlan&&) noexcept = default;
SpectralPlan& SpectralPlan::operator=(SpectralPlan&&) noexcept = default;

double SpectralPlan::transport_symbol_bound(double nu) const noexcept {
  // Face averaging of a spectral derivative followed by a face difference has
  // symbol xi sin(xi h) / h per axis.
  const double h = grid_.spacing();
  const auto& im = *impl_;
  double best = 0.0;
  for (std::size_t m = 0; m < wave_sq_.size(); ++m) {
    const double s = (im.xi0[m] * std::sin(im.xi0[m] * h) + im.xi1[m] * std::sin(im.xi1[m] * h)) / h;
    best = std::max(best, s / (1.0 + nu * wave_sq_[m]));
  }
  return best;
}

namespace {

void require_grid(const Field& f, const SpectralPlan& plan) {
  if (!(f.grid() == plan.grid())) throw ValidationError("field grid does not match spectral plan");
}

}  // namespace

Field solve_w(const Field& p, double nu, const SpectralPlan& plan) {
  require_grid(p, plan);
  if (!(nu >= 0.0)) throw ValidationError("viscosity must be nonnegative");
  if (nu == 0.0) return p;
  const auto& im = plan.impl();
  auto s = im.scratch();
  im.to_spectrum(p, s);
  const auto& ws = plan.wave_sq();
  for (std::size_t m = 0; m < im.complex_size; ++m) {
    const double mult = 1.0 / (1.0 + nu * ws[m]);
    s.spec[m][0] *= mult;
    s.spec[m][1] *= mult;
  }
  return im.from_spectrum(s, p.grid());
}

Field apply_operator(const Field& w, double nu, const SpectralPlan& plan) {
  require_grid(w, plan);
  if (nu == 0.0) return w;
  const auto& im = plan.impl();
  auto s = im.scratch();
  im.to_spectrum(w, s);
  const auto& ws = plan.wave_sq();
  for (std::size_t m = 0; m < im.complex_size; ++m) {
    const double mult = 1.0 + nu * ws[m];
    s.spec[m][0] *= mult;
    s.spec[m][1] *= mult;
  }
  return im.from_spectrum(s, w.grid());
}

std::vector<Field> gradient(const Field& w, const SpectralPlan& plan) {
  require_grid(w, plan);
  const auto& im = plan.impl();
  auto base = im.scratch();
  im.to_spectrum(w, base);
  const int nyq = im.n / 2;
  const double k0 = 2.0 * std::numbers::pi / plan.grid().box_length();

  std::vector<Field> out;
  for (int axis = 0; axis < im.dim; ++axis) {
    auto s = im.scratch();
    const auto& xi = axis == 0 ? im.xi0 : im.xi1;
    for (std::size_t m = 0; m < im.complex_size; ++m) {
      double factor = xi[m];
      if (std::abs(std::abs(factor) - k0 * nyq) < 0.5 * k0) factor = 0.0;
      // (a + ib) * (i xi) = -b xi + i a xi
      const double re = base.spec[m][0];
      const double imv = base.spec[m][1];
      s.spec[m][0] = -imv * factor;
      s.spec[m][1] = re * factor;
    }
    out.push_back(im.from_spectrum(s, w.grid()));
  }
  return out;
}

Field laplacian(const Field& w, const SpectralPlan& plan) {
  require_grid(w, plan);
  const auto& im = plan.impl();
  auto s = im.scratch();
  im.to_spectrum(w, s);
  const auto& ws = plan.wave_sq();
  for (std::size_t m = 0; m < im.complex_size; ++m) {
    s.spec[m][0] *= -ws[m];
    s.spec[m][1] *= -ws[m];
  }
  return im.from_spectrum(s, w.grid());
}

Field mollify(const Field& f, double width, const SpectralPlan& plan) {
  require_grid(f, plan);
  const auto& im = plan.impl();
  auto s = im.scratch();
  im.to_spectrum(f, s);
  const auto& ws = plan.wave_sq();
  for (std::size_t m = 0; m < im.complex_size; ++m) {
    const double g = std::exp(-0.5 * width * width * ws[m]);
    s.spec[m][0] *= g;
    s.spec[m][1] *= g;
  }
  return im.from_spectrum(s, f.grid());
}

Field gradient_magnitude(const std::vector<Field>& grad) {
  Field out(grad.front().grid());
  for (const auto& g : grad)
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += g[c] * g[c];
  for (double& v : out.values()) v = std::sqrt(v);
  return out;
}

}  // namespace tgrowth
