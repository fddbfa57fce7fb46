#include "specrob/fft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace specrob {
namespace {

struct Plan {
  std::size_t n = 0;
  std::vector<std::size_t> factors;   // radices, outermost first
  std::vector<Complex> twiddle;       // exp(-2 pi i t / n)
};

std::vector<std::size_t> factorize(std::size_t n) {
  std::vector<std::size_t> f;
  while (n % 4 == 0) { f.push_back(4); n /= 4; }
  while (n % 2 == 0) { f.push_back(2); n /= 2; }
  for (std::size_t p = 3; p * p <= n; p += 2)
    while (n % p == 0) { f.push_back(p); n /= p; }
  if (n > 1) f.push_back(n);
  return f;
}

std::shared_ptr<const Plan> plan_for(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const Plan>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) {
    auto p = std::make_shared<Plan>();
    p->n = n;
    p->factors = factorize(n);
    p->twiddle.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n);
      p->twiddle[t] = Complex(std::cos(a), std::sin(a));
    }
    slot = std::move(p);
  }
  return slot;
}

// Decimation in time: out[0..n) = DFT of in[0], in[stride], ... (n terms).
void transform(const Plan& plan, const Complex* in, std::size_t stride, Complex* out,
               std::size_t n, std::size_t level, int sign, std::vector<Complex>& scratch) {
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  const std::size_t p = plan.factors[level];
  const std::size_t m = n / p;
  for (std::size_t q = 0; q < p; ++q)
    transform(plan, in + q * stride, stride * p, out + q * m, m, level + 1, sign, scratch);

  const std::size_t step = plan.n / n;  // twiddle table stride for length n
  auto w = [&](std::size_t t) {
    const Complex z = plan.twiddle[(t % n) * step];
    return sign < 0 ? z : std::conj(z);
  };
  Complex* tmp = scratch.data();
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t q = 0; q < p; ++q) tmp[q] = out[q * m + k] * w(q * k);
    if (p == 2) {
      out[k] = tmp[0] + tmp[1];
      out[k + m] = tmp[0] - tmp[1];
    } else if (p == 4) {
      const Complex a0 = tmp[0] + tmp[2], a1 = tmp[0] - tmp[2];
      const Complex b0 = tmp[1] + tmp[3], b1 = tmp[1] - tmp[3];
      // multiply by -i (forward) or +i (inverse)
      const Complex rb1 = sign < 0 ? Complex(b1.imag(), -b1.real()) : Complex(-b1.imag(), b1.real());
      out[k] = a0 + b0;
      out[k + m] = a1 + rb1;
      out[k + 2 * m] = a0 - b0;
      out[k + 3 * m] = a1 - rb1;
    } else {
      for (std::size_t s = 0; s < p; ++s) {
        Complex acc = 0.0;
        for (std::size_t q = 0; q < p; ++q) acc += tmp[q] * w(q * s * m);
        tmp[p + s] = acc;
      }
      for (std::size_t s = 0; s < p; ++s) out[k + s * m] = tmp[p + s];
    }
  }
}

void transform_planes(Spectrum& s, int sign) {
  const std::size_t h = s.shape.height, w = s.shape.width;
  auto row_plan = plan_for(w);
  auto col_plan = plan_for(h);
  std::size_t max_radix = 1;
  for (auto f : row_plan->factors) max_radix = std::max(max_radix, f);
  for (auto f : col_plan->factors) max_radix = std::max(max_radix, f);
  std::vector<Complex> scratch(2 * max_radix);
  std::vector<Complex> line(std::max(h, w)), out(std::max(h, w));
  for (std::size_t c = 0; c < s.shape.channels; ++c) {
    Complex* plane = s.coeffs.data() + c * h * w;
    for (std::size_t i = 0; i < h; ++i) {
      transform(*row_plan, plane + i * w, 1, out.data(), w, 0, sign, scratch);
      std::copy_n(out.data(), w, plane + i * w);
    }
    for (std::size_t j = 0; j < w; ++j) {
      for (std::size_t i = 0; i < h; ++i) line[i] = plane[i * w + j];
      transform(*col_plan, line.data(), 1, out.data(), h, 0, sign, scratch);
      for (std::size_t i = 0; i < h; ++i) plane[i * w + j] = out[i];
    }
  }
}

Spectrum roll(const Spectrum& s, bool forward) {
  Spectrum out{s.shape, std::vector<Complex>(s.coeffs.size()), !s.shifted};
  const std::size_t h = s.shape.height, w = s.shape.width;
  for (std::size_t c = 0; c < s.shape.channels; ++c)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        const std::size_t ti = forward ? shift_index(i, h) : unshift_index(i, h);
        const std::size_t tj = forward ? shift_index(j, w) : unshift_index(j, w);
        out.at(c, ti, tj) = s.at(c, i, j);
      }
  return out;
}

}  // namespace

void fft1d(std::span<Complex> data, int sign) {
  const std::size_t n = data.size();
  if (n <= 1) return;
  auto plan = plan_for(n);
  std::size_t max_radix = 1;
  for (auto f : plan->factors) max_radix = std::max(max_radix, f);
  std::vector<Complex> scratch(2 * max_radix), out(n);
  transform(*plan, data.data(), 1, out.data(), n, 0, sign, scratch);
  std::copy(out.begin(), out.end(), data.begin());
}

Spectrum dft2(const Image& x) {
  Spectrum s{x.shape(), std::vector<Complex>(x.data().begin(), x.data().end()), false};
  transform_planes(s, -1);
  return s;
}

Spectrum dft2_complex(const Spectrum& in) {
  if (in.shifted) throw std::invalid_argument("dft2: input spectrum must be unshifted");
  Spectrum s = in;
  transform_planes(s, -1);
  return s;
}

Spectrum idft2_complex(const Spectrum& in) {
  if (in.shifted) throw std::invalid_argument("idft2: spectrum is shifted; call ifftshift first");
  Spectrum s = in;
  transform_planes(s, +1);
  const double scale = 1.0 / static_cast<double>(s.shape.plane());
  for (auto& z : s.coeffs) z *= scale;
  return s;
}

Image idft2(const Spectrum& s, double* max_imag) {
  Spectrum z = idft2_complex(s);
  Image out(s.shape);
  double worst = 0.0;
  for (std::size_t i = 0; i < z.coeffs.size(); ++i) {
    out.data()[i] = z.coeffs[i].real();
    worst = std::max(worst, std::abs(z.coeffs[i].imag()));
  }
  if (max_imag != nullptr) *max_imag = worst;
  return out;
}

Spectrum fftshift(const Spectrum& s) { return roll(s, true); }
Spectrum ifftshift(const Spectrum& s) { return roll(s, false); }

}  // namespace specrob
