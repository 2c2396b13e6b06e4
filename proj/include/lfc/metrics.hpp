#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lfc/errors.hpp"
#include "lfc/image.hpp"

namespace lfc {

// ---------------------------------------------------------------------------
// PSNR / SSIM
// ---------------------------------------------------------------------------

inline double mse_plane(const Plane& a, const Plane& b) {
  if (a.width != b.width || a.height != b.height) throw ShapeError("plane sizes differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    double d = static_cast<double>(a.samples[i]) - static_cast<double>(b.samples[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(a.samples.size());
}

inline double psnr_from_mse(double mse) {
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

struct PsnrResult {
  double y = 0.0;
  double cb = 0.0;
  double cr = 0.0;
};

inline PsnrResult psnr(const View& a, const View& b) {
  PsnrResult r;
  r.y = psnr_from_mse(mse_plane(a.y, b.y));
  r.cb = psnr_from_mse(mse_plane(a.cb, b.cb));
  r.cr = psnr_from_mse(mse_plane(a.cr, b.cr));
  return r;
}

inline double luma_psnr(const View& a, const View& b) { return psnr_from_mse(mse_plane(a.y, b.y)); }

// Mean structural similarity over all 8x8 uniform windows (step 1) of the
// luma plane.
inline double ssim(const View& a, const View& b) {
  constexpr int kWin = 8;
  constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);
  const Plane& pa = a.y;
  const Plane& pb = b.y;
  if (pa.width != pb.width || pa.height != pb.height) throw ShapeError("view sizes differ");
  if (pa.width < kWin || pa.height < kWin) throw ShapeError("view smaller than the ssim window");

  double total = 0.0;
  int count = 0;
  const double n = kWin * kWin;
  for (int wy = 0; wy + kWin <= pa.height; ++wy)
    for (int wx = 0; wx + kWin <= pa.width; ++wx) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (int y = 0; y < kWin; ++y)
        for (int x = 0; x < kWin; ++x) {
          double va = pa.at(wx + x, wy + y);
          double vb = pb.at(wx + x, wy + y);
          sa += va;
          sb += vb;
          saa += va * va;
          sbb += vb * vb;
          sab += va * vb;
        }
      double ma = sa / n, mb = sb / n;
      double va = saa / n - ma * ma;
      double vb = sbb / n - mb * mb;
      double cov = sab / n - ma * mb;
      double s = ((2 * ma * mb + kC1) * (2 * cov + kC2)) /
                 ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
      total += s;
      ++count;
    }
  return total / count;
}

// ---------------------------------------------------------------------------
// Bjontegaard delta metrics: cubic least-squares fit per curve, difference of
// the fits averaged over the overlapping interval.
// ---------------------------------------------------------------------------

struct RdPoint {
  double rate = 0.0;     // bits per pixel
  double quality = 0.0;  // dB (or SSIM)
};

struct RdCurve {
  std::string label;
  std::vector<RdPoint> points;
};

namespace detail {

struct Cubic {
  double c[4] = {0, 0, 0, 0};  // c0 + c1 x + c2 x^2 + c3 x^3

  double eval(double x) const { return c[0] + x * (c[1] + x * (c[2] + x * c[3])); }

  // Antiderivative evaluated at x.
  double integral(double x) const {
    return x * (c[0] + x * (c[1] / 2 + x * (c[2] / 3 + x * c[3] / 4)));
  }
};

// Least-squares cubic fit via normal equations with partial pivoting.
inline Cubic fit_cubic(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n < 4) throw DegenerateFit("cubic fit needs at least 4 points");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (xs[i] == xs[j]) throw DegenerateFit("duplicate fit abscissae");

  double a[4][5] = {};
  for (std::size_t k = 0; k < n; ++k) {
    double p[4] = {1, xs[k], xs[k] * xs[k], xs[k] * xs[k] * xs[k]};
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) a[i][j] += p[i] * p[j];
      a[i][4] += p[i] * ys[k];
    }
  }
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-12) throw DegenerateFit("singular cubic fit");
    if (piv != col)
      for (int j = 0; j <= 4; ++j) std::swap(a[piv][j], a[col][j]);
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      double f = a[r][col] / a[col][col];
      for (int j = 0; j <= 4; ++j) a[r][j] -= f * a[col][j];
    }
  }
  Cubic c;
  for (int i = 0; i < 4; ++i) c.c[i] = a[i][4] / a[i][i];
  return c;
}

inline void validate_curve(const RdCurve& c) {
  if (c.points.size() < 4) throw DegenerateFit("curve needs at least 4 points");
  for (const RdPoint& p : c.points) {
    if (!(p.rate > 0.0)) throw DegenerateFit("rates must be strictly positive");
    if (!std::isfinite(p.quality)) throw DegenerateFit("qualities must be finite");
  }
}

}  // namespace detail

// Average bitrate difference at equal quality, in percent. Negative means the
// test curve spends fewer bits than the anchor.
inline double bd_rate(const RdCurve& anchor, const RdCurve& test) {
  detail::validate_curve(anchor);
  detail::validate_curve(test);
  auto fit = [](const RdCurve& c) {
    std::vector<double> q, lr;
    for (const RdPoint& p : c.points) {
      q.push_back(p.quality);
      lr.push_back(std::log10(p.rate));
    }
    return detail::fit_cubic(q, lr);
  };
  detail::Cubic fa = fit(anchor), ft = fit(test);
  auto qrange = [](const RdCurve& c) {
    double lo = c.points[0].quality, hi = c.points[0].quality;
    for (const RdPoint& p : c.points) {
      lo = std::min(lo, p.quality);
      hi = std::max(hi, p.quality);
    }
    return std::pair<double, double>(lo, hi);
  };
  auto [alo, ahi] = qrange(anchor);
  auto [tlo, thi] = qrange(test);
  double lo = std::max(alo, tlo), hi = std::min(ahi, thi);
  if (!(hi > lo)) throw NoOverlap("quality ranges do not overlap");
  double avg = ((ft.integral(hi) - ft.integral(lo)) - (fa.integral(hi) - fa.integral(lo))) /
               (hi - lo);
  return (std::pow(10.0, avg) - 1.0) * 100.0;
}

// Average quality difference at equal rate, in the quality unit.
inline double bd_quality(const RdCurve& anchor, const RdCurve& test) {
  detail::validate_curve(anchor);
  detail::validate_curve(test);
  auto fit = [](const RdCurve& c) {
    std::vector<double> q, lr;
    for (const RdPoint& p : c.points) {
      q.push_back(p.quality);
      lr.push_back(std::log10(p.rate));
    }
    return detail::fit_cubic(lr, q);
  };
  detail::Cubic fa = fit(anchor), ft = fit(test);
  auto rrange = [](const RdCurve& c) {
    double lo = std::log10(c.points[0].rate), hi = lo;
    for (const RdPoint& p : c.points) {
      lo = std::min(lo, std::log10(p.rate));
      hi = std::max(hi, std::log10(p.rate));
    }
    return std::pair<double, double>(lo, hi);
  };
  auto [alo, ahi] = rrange(anchor);
  auto [tlo, thi] = rrange(test);
  double lo = std::max(alo, tlo), hi = std::min(ahi, thi);
  if (!(hi > lo)) throw NoOverlap("rate ranges do not overlap");
  return ((ft.integral(hi) - ft.integral(lo)) - (fa.integral(hi) - fa.integral(lo))) / (hi - lo);
}

// ---------------------------------------------------------------------------
// CSV persistence for RD curves: header line, then rate_bpp,quality rows.
// ---------------------------------------------------------------------------

inline std::string format_quality(double q) {
  if (std::isinf(q)) return q > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(12);
  os << q;
  return os.str();
}

inline void save_rd_csv(const RdCurve& curve, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot write " + path);
  f << "rate_bpp,quality\n";
  for (const RdPoint& p : curve.points) {
    std::ostringstream os;
    os.precision(12);
    os << p.rate;
    f << os.str() << "," << format_quality(p.quality) << "\n";
  }
}

inline RdCurve load_rd_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot read " + path);
  RdCurve c;
  c.label = path;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.find("rate") != std::string::npos) continue;
    }
    std::size_t comma = line.find(',');
    if (comma == std::string::npos) throw FormatError("bad csv row in " + path + ": " + line);
    RdPoint p;
    try {
      p.rate = std::stod(line.substr(0, comma));
      std::string q = line.substr(comma + 1);
      p.quality = q == "inf" ? std::numeric_limits<double>::infinity() : std::stod(q);
    } catch (const std::exception&) {
      throw FormatError("bad csv row in " + path + ": " + line);
    }
    c.points.push_back(p);
  }
  return c;
}

}  // namespace lfc
