#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "lfc/d2gan.hpp"
#include "lfc/gop.hpp"
#include "lfc/rng.hpp"
#include "lfc/scan.hpp"

using lfc::Discriminator;
using lfc::Generator;
using lfc::GeneratorArch;
using lfc::GridPos;
using lfc::Rng;
using lfc::SynthesisInput;
using lfc::Tensor;

namespace {

// Small architecture that exercises every code path at desk scale.
GeneratorArch tiny_arch() {
  GeneratorArch a;
  a.n_sweep = 3;
  a.n_refs = 2;
  a.d_max = 1.0;
  a.disp_channels = {4, 1};
  a.disp_kernels = {3, 3};
  a.color_channels = {4, 3};
  a.color_kernels = {3, 1};
  return a;
}

Tensor<double> smooth_patch(int ch, int n, double phase) {
  Tensor<double> t({ch, n, n});
  for (int c = 0; c < ch; ++c)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        t.at3(c, y, x) = 0.5 + 0.3 * std::sin(0.7 * x + phase + c) * std::cos(0.5 * y - phase);
  return t;
}

SynthesisInput<double> smooth_input(const GeneratorArch& a, int patch, double phase) {
  SynthesisInput<double> in;
  for (int r = 0; r < a.n_refs; ++r) {
    in.refs_color.push_back(smooth_patch(3, patch, phase + r));
    Tensor<double> luma({1, patch, patch});
    for (int y = 0; y < patch; ++y)
      for (int x = 0; x < patch; ++x) luma.at3(0, y, x) = in.refs_color[r].at3(0, y, x);
    in.refs_luma.push_back(std::move(luma));
    in.positions.push_back({0, 2 * r});
  }
  in.target = {0, 1};
  return in;
}

}  // namespace

TEST_CASE("objective value closed forms hold to machine precision") {
  const double e = std::exp(1.0);
  std::vector<double> ones = {1.0, 1.0, 1.0};
  std::vector<double> es = {e, e, e};

  // all scores one: the two linear terms survive, the logs vanish
  REQUIRE(lfc::d2gan_value(ones, ones, ones, ones, 1.0, 1.0) == -2.0);
  REQUIRE(lfc::d2gan_value(ones, ones, ones, ones, 0.2, 0.2) == -2.0);
  REQUIRE_THAT(lfc::d2gan_value(es, ones, ones, ones, 0.2, 0.2),
               Catch::Matchers::WithinAbs(-1.8, 1e-15));

  REQUIRE_THAT(lfc::loss_d1_value({e}, {1.0}, 0.2), Catch::Matchers::WithinAbs(-0.8, 1e-15));
  REQUIRE_THAT(lfc::loss_d1_value({e, e}, {1.0, 1.0}, 0.2),
               Catch::Matchers::WithinAbs(-0.8, 1e-15));  // invariant under batch size

  REQUIRE(lfc::loss_d2_value(ones, ones, 0.2) == -1.0);
  REQUIRE_THAT(lfc::loss_d2_value({1.0}, {e}, 0.2), Catch::Matchers::WithinAbs(-0.8, 1e-15));

  REQUIRE_THAT(lfc::loss_g_value({1.0}, {e}, 0.2, {}, 0.0),
               Catch::Matchers::WithinAbs(-0.8, 1e-15));
  // zero reconstruction error leaves only the adversarial part
  REQUIRE(lfc::loss_g_value({1.0, 1.0}, {1.0, 1.0}, 0.2, {0.0, 0.0}, 10.0) ==
          lfc::loss_g_value({1.0, 1.0}, {1.0, 1.0}, 0.2, {}, 0.0));
}

TEST_CASE("objective values reject non-positive scores and bad batches") {
  std::vector<double> ones = {1.0, 1.0};
  std::vector<double> zero = {1.0, 0.0};
  std::vector<double> neg = {-0.5, 1.0};

  REQUIRE_THROWS_AS(lfc::d2gan_value(zero, ones, ones, ones, 1, 1), lfc::DomainError);
  REQUIRE_THROWS_AS(lfc::d2gan_value(ones, neg, ones, ones, 1, 1), lfc::DomainError);
  REQUIRE_THROWS_AS(lfc::d2gan_value(ones, ones, zero, ones, 1, 1), lfc::DomainError);
  REQUIRE_THROWS_AS(lfc::d2gan_value(ones, ones, ones, neg, 1, 1), lfc::DomainError);
  REQUIRE_THROWS_AS(lfc::d2gan_value({}, ones, ones, ones, 1, 1), lfc::ShapeError);

  REQUIRE_THROWS_AS(lfc::loss_d1_value(zero, ones, 0.2), lfc::DomainError);
  REQUIRE_THROWS_AS(lfc::loss_d1_value(ones, {1.0}, 0.2), lfc::ShapeError);
  REQUIRE_THROWS_AS(lfc::loss_d2_value(ones, neg, 0.2), lfc::DomainError);
  REQUIRE_THROWS_AS(lfc::loss_g_value(neg, ones, 0.2, {}, 0.0), lfc::DomainError);
  REQUIRE_THROWS_AS(lfc::loss_g_value(ones, {1.0}, 0.2, {}, 0.0), lfc::ShapeError);
}

TEST_CASE("discriminator forward is strictly positive and shape-checked") {
  Rng rng(3);
  Discriminator<double> d(3, 8, {4, 6}, 3);
  d.init(rng);
  auto x = smooth_patch(3, 8, 0.3);
  double s = d.forward(x);
  REQUIRE(s > 0.0);

  REQUIRE_THROWS_AS(d.forward(smooth_patch(2, 8, 0.0)), lfc::ShapeError);
  REQUIRE_THROWS_AS(Discriminator<double>(3, 4, {8, 8}, 3), lfc::ShapeError);
}

TEST_CASE("batch discriminator losses match the score-space formulas") {
  Rng rng(11);
  Discriminator<double> d(3, 8, {4}, 3);
  d.init(rng);
  std::vector<Tensor<double>> real = {smooth_patch(3, 8, 0.1), smooth_patch(3, 8, 0.9)};
  std::vector<Tensor<double>> fake = {smooth_patch(3, 8, 1.7), smooth_patch(3, 8, 2.4)};

  std::vector<double> sr, sf;
  for (const auto& x : real) sr.push_back(d.forward(x));
  for (const auto& x : fake) sf.push_back(d.forward(x));

  auto g1 = d.zero_grads();
  double v1 = lfc::loss_d1(d, real, fake, 0.2, g1);
  REQUIRE_THAT(v1, Catch::Matchers::WithinRel(lfc::loss_d1_value(sr, sf, 0.2), 1e-12));

  auto g2 = d.zero_grads();
  double v2 = lfc::loss_d2(d, real, fake, 0.2, g2);
  REQUIRE_THAT(v2, Catch::Matchers::WithinRel(lfc::loss_d2_value(sr, sf, 0.2), 1e-12));

  REQUIRE_THROWS_AS(lfc::loss_d1(d, real, {fake[0]}, 0.2, g1), lfc::ShapeError);
}

TEST_CASE("the two discriminator losses are mirror images of each other") {
  // loss_d1(real=A, fake=B, w) and loss_d2(real=B, fake=A, w) are the same
  // function of the same scores, so values and gradients must agree exactly.
  Rng rng(13);
  Discriminator<double> d(3, 8, {4}, 3);
  d.init(rng);
  std::vector<Tensor<double>> a = {smooth_patch(3, 8, 0.4), smooth_patch(3, 8, 1.3)};
  std::vector<Tensor<double>> b = {smooth_patch(3, 8, 2.2), smooth_patch(3, 8, 3.0)};

  auto g1 = d.zero_grads();
  auto g2 = d.zero_grads();
  double v1 = lfc::loss_d1(d, a, b, 0.35, g1);
  double v2 = lfc::loss_d2(d, b, a, 0.35, g2);
  REQUIRE_THAT(v1, Catch::Matchers::WithinAbs(v2, 1e-14));
  for (std::size_t i = 0; i < g1.size(); ++i)
    for (std::size_t j = 0; j < g1[i].size(); ++j)
      REQUIRE_THAT(g1[i][j], Catch::Matchers::WithinAbs(g2[i][j], 1e-14));
}

TEST_CASE("discriminator loss gradients match finite differences") {
  Rng rng(21);
  Discriminator<double> d(3, 8, {4}, 3);
  d.init(rng);
  std::vector<Tensor<double>> real = {smooth_patch(3, 8, 0.1), smooth_patch(3, 8, 0.8)};
  std::vector<Tensor<double>> fake = {smooth_patch(3, 8, 1.9), smooth_patch(3, 8, 2.7)};

  auto grads = d.zero_grads();
  lfc::loss_d1(d, real, fake, 0.2, grads);
  auto params = d.params();

  auto loss = [&]() {
    auto scratch = d.zero_grads();
    return lfc::loss_d1(d, real, fake, 0.2, scratch);
  };
  Rng pick(5);
  int checked = 0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    for (int n = 0; n < 3; ++n) {
      std::size_t j = pick.next_below(static_cast<std::uint32_t>(params[pi]->size()));
      double fd = testutil::fd_central([&](double v) {
        double keep = (*params[pi])[j];
        (*params[pi])[j] = v;
        double l = loss();
        (*params[pi])[j] = keep;
        return l;
      }, (*params[pi])[j], 1e-6);
      REQUIRE(testutil::rel_err(grads[pi][j], fd) < 1e-4);
      ++checked;
    }
  }
  REQUIRE(checked >= 12);
}

TEST_CASE("generator architecture is validated at construction") {
  REQUIRE_NOTHROW(Generator<double>(tiny_arch()));

  GeneratorArch bad = tiny_arch();
  bad.disp_channels = {4, 2};
  REQUIRE_THROWS_AS(Generator<double>(bad), lfc::ModelShapeError);

  bad = tiny_arch();
  bad.color_channels = {4, 4};
  REQUIRE_THROWS_AS(Generator<double>(bad), lfc::ModelShapeError);

  bad = tiny_arch();
  bad.disp_kernels = {4, 3};  // odd margin
  REQUIRE_THROWS_AS(Generator<double>(bad), lfc::ModelShapeError);
}

TEST_CASE("generator forward produces the expected geometry") {
  Rng rng(31);
  Generator<double> gen(tiny_arch());
  gen.init(rng);
  auto in = smooth_input(gen.arch, 12, 0.2);

  lfc::GenTrace<double> tr;
  auto out = lfc::generator_forward(gen, in, &tr);
  REQUIRE(out.dim(0) == 3);
  REQUIRE(out.dim(1) == 6);  // 12 minus disparity margin 4 minus color margin 2
  REQUIRE(out.dim(2) == 6);
  REQUIRE(tr.disparity.dim(0) == 1);
  REQUIRE(tr.disparity.dim(1) == 8);
  for (double v : out.v) REQUIRE(std::isfinite(v));

  SynthesisInput<double> wrong = in;
  wrong.refs_color.pop_back();
  wrong.refs_luma.pop_back();
  wrong.positions.pop_back();
  REQUIRE_THROWS_AS(lfc::generator_forward(gen, wrong), lfc::ModelShapeError);

  SynthesisInput<double> skewed = in;
  skewed.positions.pop_back();
  REQUIRE_THROWS_AS(lfc::generator_forward(gen, skewed), lfc::ShapeError);
}

TEST_CASE("normalized target position maps the reference bounding box to [-1,1]") {
  std::vector<GridPos> refs = {{0, 0}, {2, 2}};
  auto mid = lfc::normalized_target_pos(refs, {1, 1});
  REQUIRE_THAT(mid.first, Catch::Matchers::WithinAbs(0.0, 1e-12));
  REQUIRE_THAT(mid.second, Catch::Matchers::WithinAbs(0.0, 1e-12));
  auto lo = lfc::normalized_target_pos(refs, {0, 0});
  REQUIRE(lo.first == -1.0);
  REQUIRE(lo.second == -1.0);
  auto hi = lfc::normalized_target_pos(refs, {2, 2});
  REQUIRE(hi.first == 1.0);
  REQUIRE(hi.second == 1.0);

  std::vector<GridPos> row = {{1, 0}, {1, 4}};
  auto deg = lfc::normalized_target_pos(row, {1, 3});
  REQUIRE(deg.first == 0.0);  // degenerate axis collapses to the center
  REQUIRE(deg.second == 0.5);
}

TEST_CASE("center crop and uncrop are inverse placements") {
  Tensor<double> x({2, 6, 8});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  auto c = lfc::crop_center(x, 4, 4);
  REQUIRE(c.dim(1) == 4);
  REQUIRE(c.at3(0, 0, 0) == x.at3(0, 1, 2));
  REQUIRE(c.at3(1, 3, 3) == x.at3(1, 4, 5));

  auto back = lfc::uncrop_center(c, x.dims);
  REQUIRE(back.same_shape(x));
  REQUIRE(back.at3(0, 0, 0) == 0.0);
  REQUIRE(back.at3(0, 1, 2) == x.at3(0, 1, 2));
  REQUIRE(back.at3(1, 4, 5) == x.at3(1, 4, 5));

  REQUIRE_THROWS_AS(lfc::crop_center(x, 7, 4), lfc::ShapeError);
}

TEST_CASE("full generator objective matches score-space value and finite differences") {
  Rng rng(47);
  Generator<double> gen(tiny_arch());
  gen.init(rng);
  // keep predicted disparities away from integer sampling positions, where
  // bilinear interpolation kinks and finite differences straddle the corner
  gen.disparity_net.layers.back().b[0] = 0.37;
  Discriminator<double> d1(3, 4, {4}, 3);
  Discriminator<double> d2(3, 4, {4}, 3);
  d1.init(rng);
  d2.init(rng);

  std::vector<SynthesisInput<double>> inputs = {smooth_input(gen.arch, 12, 0.2),
                                                smooth_input(gen.arch, 12, 1.1)};
  std::vector<Tensor<double>> targets = {smooth_patch(3, 4, 0.5), smooth_patch(3, 4, 1.4)};

  const double beta = 0.2, lam = 10.0;
  auto grads = gen.zero_grads();
  double value = lfc::loss_g(gen, d1, d2, inputs, targets, beta, lam, grads);

  // recompute through the score-space formula
  std::vector<double> s1, s2, l1s;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto out = lfc::generator_forward(gen, inputs[i]);
    auto synth = lfc::crop_center(out, 4, 4);
    s1.push_back(d1.forward(synth));
    s2.push_back(d2.forward(synth));
    double l1 = 0.0;
    for (std::size_t j = 0; j < synth.size(); ++j) l1 += std::fabs(synth[j] - targets[i][j]);
    l1s.push_back(l1 / static_cast<double>(synth.size()));
  }
  REQUIRE_THAT(value, Catch::Matchers::WithinRel(lfc::loss_g_value(s1, s2, beta, l1s, lam), 1e-12));

  // end-to-end gradient check through warp, both nets and both discriminators
  auto params = gen.params();
  auto loss = [&]() {
    auto scratch = gen.zero_grads();
    return lfc::loss_g(gen, d1, d2, inputs, targets, beta, lam, scratch);
  };
  Rng pick(7);
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    for (int n = 0; n < 2; ++n) {
      std::size_t j = pick.next_below(static_cast<std::uint32_t>(params[pi]->size()));
      double fd = testutil::fd_central([&](double v) {
        double keep = (*params[pi])[j];
        (*params[pi])[j] = v;
        double l = loss();
        (*params[pi])[j] = keep;
        return l;
      }, (*params[pi])[j], 1e-6);
      REQUIRE(testutil::rel_err(grads[pi][j], fd) < 1e-3);
    }
  }
}

TEST_CASE("view synthesis at full view size is deterministic") {
  Rng rng(53);
  Generator<float> gen(tiny_arch());
  gen.init(rng);

  std::vector<lfc::View> refs = {testutil::textured_view(16, 12, 1),
                                 testutil::textured_view(16, 12, 2)};
  std::vector<GridPos> pos = {{0, 0}, {0, 2}};

  auto r1 = lfc::generate_view(gen, refs, pos, {0, 1});
  REQUIRE(r1.view.width() == 16);
  REQUIRE(r1.view.height() == 12);
  REQUIRE(r1.disparity.width == 16);
  REQUIRE(r1.disparity.height == 12);

  auto r2 = lfc::generate_view(gen, refs, pos, {0, 1});
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 12; ++y)
      for (int x = 0; x < 16; ++x)
        REQUIRE(r1.view.plane(c).at(x, y) == r2.view.plane(c).at(x, y));

  REQUIRE_THROWS_AS(lfc::generate_view(gen, {}, {}, {0, 1}), lfc::NoReferences);
  REQUIRE_THROWS_AS(lfc::generate_view(gen, {refs[0]}, {pos[0]}, {0, 1}), lfc::ModelShapeError);
  std::vector<lfc::View> uneven = {refs[0], testutil::textured_view(8, 8, 3)};
  REQUIRE_THROWS_AS(lfc::generate_view(gen, uneven, pos, {0, 1}), lfc::ShapeError);
}

TEST_CASE("reference selection prefers near, coded views and fails cleanly") {
  lfc::GopLayout layout(16, 64);
  lfc::PseudoSequence seq = lfc::spiral_scan(8, 8);
  const int poc = 5;  // top temporal level inside the first gop
  REQUIRE(layout.level(poc) == layout.max_level());

  std::set<int> coded;
  for (int p = 0; p < 64; ++p)
    if (layout.level(p) <= layout.max_level() - 1) coded.insert(p);

  auto refs = lfc::select_references(layout, seq, poc, coded, 4);
  REQUIRE(refs.size() == 4);
  GridPos tp = seq.pos_of(poc);
  int prev = -1;
  for (int q : refs) {
    REQUIRE(coded.count(q) == 1);
    GridPos p = seq.pos_of(q);
    int d = (p.s - tp.s) * (p.s - tp.s) + (p.t - tp.t) * (p.t - tp.t);
    REQUIRE(d >= prev);
    prev = d;
  }
  // immediate lower-level neighbors are eligible references for a top view
  REQUIRE((std::count(refs.begin(), refs.end(), 4) + std::count(refs.begin(), refs.end(), 6)) >= 1);

  // dropping a neighbor removes it from the candidate pool
  std::set<int> without = coded;
  without.erase(4);
  without.erase(6);
  auto refs2 = lfc::select_references(layout, seq, poc, without, 4);
  for (int q : refs2) {
    REQUIRE(q != 4);
    REQUIRE(q != 6);
  }

  REQUIRE_THROWS_AS(lfc::select_references(layout, seq, poc, {}, 4), lfc::NoReferences);

  // requesting more references than exist cycles through the kept list
  std::set<int> only = {0, 16};
  auto refs3 = lfc::select_references(layout, seq, poc, only, 4);
  REQUIRE(refs3.size() == 4);
  for (int q : refs3) REQUIRE(only.count(q) == 1);
}
