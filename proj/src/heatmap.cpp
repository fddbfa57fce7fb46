#include "specrob/heatmap.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "specrob/augment.hpp"
#include "specrob/parallel.hpp"
#include "specrob/rng.hpp"

namespace specrob {

std::pair<std::size_t, std::size_t> HeatMap::shifted(std::size_t r, std::size_t c) const {
  if (window == 0) return {r, c};
  return {height / 2 - window / 2 + r, width / 2 - window / 2 + c};
}

namespace {

struct Grid {
  std::size_t rows, cols;
  std::vector<FrequencyIndex> rep;  // representative frequency per cell
};

Grid make_grid(const Shape& s, std::size_t window) {
  const std::size_t h = s.height, w = s.width;
  if (window > std::min(h, w)) throw std::invalid_argument("heat map window exceeds the image grid");
  Grid g{window ? window : h, window ? window : w, {}};
  const std::size_t r0 = window ? h / 2 - window / 2 : 0;
  const std::size_t c0 = window ? w / 2 - window / 2 : 0;
  for (std::size_t r = 0; r < g.rows; ++r)
    for (std::size_t c = 0; c < g.cols; ++c)
      g.rep.push_back(FrequencyIndex::from_shifted(r0 + r, c0 + c, h, w).canonical(h, w));
  return g;
}

// Distinct work items: one per representative in mirror mode, one per cell
// otherwise. Returns the item index of every cell.
std::vector<std::size_t> plan_items(const Grid& g, bool mirror, std::vector<FrequencyIndex>& items) {
  std::vector<std::size_t> of_cell(g.rep.size());
  std::map<FrequencyIndex, std::size_t> seen;
  for (std::size_t k = 0; k < g.rep.size(); ++k) {
    if (mirror) {
      auto [it, fresh] = seen.emplace(g.rep[k], items.size());
      if (fresh) items.push_back(g.rep[k]);
      of_cell[k] = it->second;
    } else {
      of_cell[k] = items.size();
      items.push_back(g.rep[k]);
    }
  }
  return of_cell;
}

// Perturbed copies of images [begin, end) for one frequency and repeat.
std::vector<Image> perturbed_batch(std::span<const Image> images, std::size_t begin, std::size_t end,
                                   FrequencyIndex f, std::size_t repeat, const PerturbationParams& p,
                                   std::span<const double> basis) {
  std::vector<Image> out;
  out.reserve(end - begin);
  std::vector<double> coef;
  for (std::size_t n = begin; n < end; ++n) {
    Image x = images[n];
    coef = perturbation_signs(x.channels(), p.sign, derive_seed(p.seed, "heat", {f.i, f.j, n, repeat}));
    for (double& c : coef) c *= p.norm;
    add_basis(x, basis, coef);
    if (p.clip) clip01_inplace(x.values());
    out.push_back(std::move(x));
  }
  return out;
}

void check_inputs(std::span<const Image> images, const Model& model) {
  if (images.empty()) throw std::invalid_argument("heat map needs at least one image");
  for (const auto& im : images)
    if (im.shape() != model.info().input) throw std::invalid_argument("image shape does not match the model");
}

HeatMap blank(const Shape& s, const Grid& g, const HeatMapOptions& opt, std::size_t n) {
  HeatMap h;
  h.height = s.height;
  h.width = s.width;
  h.window = opt.window;
  h.rows = g.rows;
  h.cols = g.cols;
  h.grid.assign(g.rows * g.cols, 0.0);
  h.norm = opt.params.norm;
  h.samples = n;
  h.model_id = opt.model_id;
  return h;
}

}  // namespace

HeatMap error_heatmap(const Model& model, std::span<const Image> images, std::span<const int> labels,
                      const HeatMapOptions& opt) {
  check_inputs(images, model);
  if (labels.size() != images.size()) throw std::invalid_argument("labels and images differ in length");
  if (opt.repeats == 0 || opt.batch == 0) throw std::invalid_argument("repeats and batch must be positive");
  const Shape s = images.front().shape();
  const Grid g = make_grid(s, opt.window);
  std::vector<FrequencyIndex> items;
  const auto of_cell = plan_items(g, opt.mirror, items);
  const auto table = shared_basis_table(s.height, s.width);

  std::vector<double> value(items.size());
  parallel_for(items.size(), [&](std::size_t k) {
    const FrequencyIndex f = items[k];
    std::size_t wrong = 0;
    for (std::size_t r = 0; r < opt.repeats; ++r)
      for (std::size_t b = 0; b < images.size(); b += opt.batch) {
        const std::size_t e = std::min(images.size(), b + opt.batch);
        const auto batch = perturbed_batch(images, b, e, f, r, opt.params, (*table)(f));
        const Logits l = model.forward(batch);
        check_finite(l);
        for (std::size_t n = b; n < e; ++n) wrong += l.argmax(n - b) != labels[n];
      }
    value[k] = static_cast<double>(wrong) / static_cast<double>(images.size() * opt.repeats);
  });

  HeatMap h = blank(s, g, opt, images.size());
  for (std::size_t c = 0; c < h.grid.size(); ++c) h.grid[c] = value[of_cell[c]];
  return h;
}

HeatMap layer_heatmap(const Model& model, std::span<const Image> images, const std::string& layer,
                      const HeatMapOptions& opt) {
  check_inputs(images, model);
  if (!model.info().layer_taps) throw std::logic_error("model does not offer layer taps");
  if (opt.repeats == 0 || opt.batch == 0) throw std::invalid_argument("repeats and batch must be positive");
  const Shape s = images.front().shape();
  const Grid g = make_grid(s, opt.window);
  std::vector<FrequencyIndex> items;
  const auto of_cell = plan_items(g, opt.mirror, items);
  const auto table = shared_basis_table(s.height, s.width);

  std::vector<Image> clean;
  for (std::size_t b = 0; b < images.size(); b += opt.batch) {
    const std::size_t e = std::min(images.size(), b + opt.batch);
    auto taps = model.forward_with_taps(images.subspan(b, e - b), {layer});
    for (auto& t : taps.layers.at(layer)) clean.push_back(std::move(t));
  }

  std::vector<double> value(items.size());
  parallel_for(items.size(), [&](std::size_t k) {
    const FrequencyIndex f = items[k];
    double sum = 0.0;
    for (std::size_t r = 0; r < opt.repeats; ++r)
      for (std::size_t b = 0; b < images.size(); b += opt.batch) {
        const std::size_t e = std::min(images.size(), b + opt.batch);
        const auto batch = perturbed_batch(images, b, e, f, r, opt.params, (*table)(f));
        const auto taps = model.forward_with_taps(batch, {layer});
        const auto& out = taps.layers.at(layer);
        for (std::size_t n = b; n < e; ++n) sum += l2_norm(out[n - b] - clean[n]);
      }
    value[k] = sum / static_cast<double>(images.size() * opt.repeats);
  });

  HeatMap h = blank(s, g, opt, images.size());
  h.kind = HeatKind::layer_delta;
  h.layer = layer;
  for (std::size_t c = 0; c < h.grid.size(); ++c) h.grid[c] = value[of_cell[c]];
  return h;
}

std::vector<BandCurvePoint> bandlimited_error_curve(const Model& model, std::span<const Image> images,
                                                    std::span<const int> labels, FilterMode mode,
                                                    const std::vector<double>& norms,
                                                    const std::vector<std::size_t>& bandwidths,
                                                    std::uint64_t seed, bool clip) {
  check_inputs(images, model);
  if (labels.size() != images.size()) throw std::invalid_argument("labels and images differ in length");
  const Shape s = images.front().shape();
  for (auto b : bandwidths) check_filter(FilterSpec{mode, b}, s.height, s.width);
  std::vector<BandCurvePoint> points;
  for (auto b : bandwidths)
    for (double v : norms) points.push_back({mode, b, v, 0.0});

  parallel_for(points.size(), [&](std::size_t k) {
    const auto& p = points[k];
    std::vector<Image> batch;
    batch.reserve(images.size());
    for (std::size_t n = 0; n < images.size(); ++n) {
      const auto noise_seed = derive_seed(seed, "bandcurve", {p.bandwidth, k % norms.size(), n});
      Image x = images[n] + band_limited_noise(s, BandNoiseConfig{FilterSpec{mode, p.bandwidth}, p.norm, noise_seed});
      if (clip) clip01_inplace(x.values());
      batch.push_back(std::move(x));
    }
    const auto pred = model.predict(batch);
    std::size_t wrong = 0;
    for (std::size_t n = 0; n < images.size(); ++n) wrong += pred[n] != labels[n];
    points[k].error = static_cast<double>(wrong) / static_cast<double>(images.size());
  });
  return points;
}

namespace {

bool inside_center(const HeatMap& h, std::size_t r, std::size_t c, std::size_t k) {
  const auto [sr, sc] = h.shifted(r, c);
  const long lo_r = static_cast<long>(h.height / 2) - static_cast<long>(k / 2);
  const long lo_c = static_cast<long>(h.width / 2) - static_cast<long>(k / 2);
  const long rr = static_cast<long>(sr), cc = static_cast<long>(sc);
  return rr >= lo_r && rr < lo_r + static_cast<long>(k) && cc >= lo_c && cc < lo_c + static_cast<long>(k);
}

double mean_where(const HeatMap& h, std::size_t k, bool inside) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < h.rows; ++r)
    for (std::size_t c = 0; c < h.cols; ++c)
      if (inside_center(h, r, c, k) == inside) {
        sum += h.at(r, c);
        ++n;
      }
  if (n == 0) throw std::invalid_argument("heat map region is empty");
  return sum / static_cast<double>(n);
}

}  // namespace

double heatmap_mean_outside(const HeatMap& h, std::size_t k) { return mean_where(h, k, false); }
double heatmap_mean_inside(const HeatMap& h, std::size_t k) { return mean_where(h, k, true); }

}  // namespace specrob
