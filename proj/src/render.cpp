#include "lsecbf/render.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "lsecbf/errors.hpp"

namespace lsecbf {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

const char* colour(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string points(const std::vector<Eigen::Vector2d>& pts) {
  std::string s;
  for (const auto& p : pts) {
    if (!s.empty()) s += ' ';
    // SVG y points down
    s += num(p.x()) + "," + num(-p.y());
  }
  return s;
}

std::vector<Eigen::Vector2d> star(const Eigen::Vector2d& c, double r) {
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < 10; ++i) {
    const double a = std::numbers::pi / 2 + i * std::numbers::pi / 5;
    const double rr = (i % 2 == 0) ? r : 0.4 * r;
    pts.emplace_back(c.x() + rr * std::cos(a), c.y() + rr * std::sin(a));
  }
  return pts;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

std::vector<Eigen::Vector2d> smoothed_boundary(const SetSpec& set, const ParamVector& pose, int samples) {
  if (samples < 3) throw InvalidInput("need at least 3 boundary samples");
  const Eigen::VectorXd c = smoothed_center(set, pose);
  std::vector<Eigen::Vector2d> out;
  out.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double a = 2.0 * std::numbers::pi * i / samples;
    const Eigen::Vector2d dir(std::cos(a), std::sin(a));
    double lo = 0.0, hi = 0.25;
    auto outside = [&](double r) { return membership_margin(set, c + r * dir, pose) > 0.0; };
    while (!outside(hi)) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e6) throw InvalidInput("smoothed set is unbounded along a ray");
    }
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (outside(mid) ? hi : lo) = mid;
    }
    out.emplace_back(c + lo * dir);
  }
  return out;
}

std::vector<std::size_t> frame_ticks(std::size_t num_ticks, std::size_t every_k) {
  if (every_k == 0) throw InvalidInput("frame interval must be positive");
  std::vector<std::size_t> out;
  const std::size_t steps = num_ticks == 0 ? 0 : num_ticks - 1;
  if (num_ticks == 0 || every_k > steps) return out;
  for (std::size_t k = 0; k <= steps; k += every_k) out.push_back(k);
  return out;
}

RenderOutput render_frames(const SimTrace& tr, const std::filesystem::path& dir, std::size_t every_k) {
  if (tr.rows.empty() || tr.num_ticks == 0) throw InvalidInput("cannot render an empty trace");
  const auto ticks = frame_ticks(tr.num_ticks, every_k);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  const std::size_t na = tr.num_agents();
  std::vector<SetSpec> sets;
  std::vector<std::shared_ptr<RigidPolytope>> bodies;
  double body_r = 0.0;
  for (const auto& a : tr.config.agents) {
    bodies.push_back(std::make_shared<RigidPolytope>(a.body.build()));
    sets.emplace_back(bodies.back(), SmoothMaxParams{tr.config.agent_epsilon(a)});
    for (const auto& v : bodies.back()->vertices(ParamVector::rigid_pose(0, 0, 0))) body_r = std::max(body_r, v.norm());
  }

  // fixed view over the whole run
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(1e300), hi = Eigen::Vector2d::Constant(-1e300);
  for (const auto& r : tr.rows) {
    lo = lo.cwiseMin(r.lambda.head<2>());
    hi = hi.cwiseMax(r.lambda.head<2>());
  }
  for (const auto& a : tr.config.agents) {
    lo = lo.cwiseMin(a.goal);
    hi = hi.cwiseMax(a.goal);
  }
  const double pad = 1.5 * body_r + 0.5;
  lo.array() -= pad;
  hi.array() += pad;
  const std::string view = num(lo.x()) + " " + num(-hi.y()) + " " + num(hi.x() - lo.x()) + " " + num(hi.y() - lo.y());
  const double stroke = 0.004 * (hi - lo).maxCoeff();

  RenderOutput out;
  for (std::size_t k : ticks) {
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"720\" viewBox=\"" << view << "\">\n";
    svg << "<rect x=\"" << num(lo.x()) << "\" y=\"" << num(-hi.y()) << "\" width=\"" << num(hi.x() - lo.x())
        << "\" height=\"" << num(hi.y() - lo.y()) << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << num(lo.x() + 0.2) << "\" y=\"" << num(-hi.y() + 0.6) << "\" font-size=\"0.4\">t = "
        << num(tr.at(k, 0).t) << " s</text>\n";
    for (std::size_t a = 0; a < na; ++a) {
      const AgentSample& s = tr.at(k, a);
      const ParamVector pose = ParamVector::rigid_pose(s.lambda);
      svg << "<polygon points=\"" << points(star(tr.config.agents[a].goal, 0.3)) << "\" fill=\"" << colour(a)
          << "\"/>\n";
      std::vector<Eigen::Vector2d> boundary;
      try {
        boundary = smoothed_boundary(sets[a], pose);
      } catch (const Error&) {
      }
      if (!boundary.empty()) {
        svg << "<polygon points=\"" << points(boundary) << "\" fill=\"" << colour(a)
            << "\" fill-opacity=\"0.25\" stroke=\"" << colour(a) << "\" stroke-width=\"" << num(stroke) << "\"/>\n";
      }
      svg << "<polygon points=\"" << points(bodies[a]->vertices(pose)) << "\" fill=\"" << colour(a)
          << "\" fill-opacity=\"0.8\" stroke=\"black\" stroke-width=\"" << num(stroke) << "\"/>\n";
    }
    svg << "</svg>\n";
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu.svg", k);
    write_file(dir / name, svg.str());
    out.frames.push_back(dir / name);
  }

  // h_min chart
  const double w = 800, h = 400, ml = 70, mr = 20, mt = 20, mb = 50;
  const double t_end = tr.at(tr.num_ticks - 1, 0).t;
  double ymin = 0.0, ymax = 0.0;
  for (const auto& r : tr.rows) {
    if (std::isfinite(r.h_min)) {
      ymin = std::min(ymin, r.h_min);
      ymax = std::max(ymax, r.h_min);
    }
  }
  if (ymax <= ymin) ymax = ymin + 1.0;
  const double span = ymax - ymin;
  ymin -= 0.05 * span;
  ymax += 0.05 * span;
  auto px = [&](double t) { return ml + (w - ml - mr) * (t_end > 0 ? t / t_end : 0.0); };
  auto py = [&](double v) { return mt + (h - mt - mb) * (ymax - v) / (ymax - ymin); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << num(py(0.0)) << "\" x2=\"" << w - mr << "\" y2=\"" << num(py(0.0))
      << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = ymin + (ymax - ymin) * i / 4.0;
    svg << "<text x=\"" << ml - 6 << "\" y=\"" << num(py(v) + 4) << "\" font-size=\"12\" text-anchor=\"end\">"
        << num(v) << "</text>\n";
    const double t = t_end * i / 4.0;
    svg << "<text x=\"" << num(px(t)) << "\" y=\"" << h - mb + 18 << "\" font-size=\"12\" text-anchor=\"middle\">"
        << num(t) << "</text>\n";
  }
  svg << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 10 << "\" font-size=\"13\" text-anchor=\"middle\">t [s]</text>\n";
  svg << "<text x=\"16\" y=\"" << (mt + h - mb) / 2 << "\" font-size=\"13\" transform=\"rotate(-90 16 "
      << (mt + h - mb) / 2 << ")\" text-anchor=\"middle\">min_j h_j</text>\n";
  for (std::size_t a = 0; a < na; ++a) {
    std::string pts;
    for (std::size_t k = 0; k < tr.num_ticks; ++k) {
      const AgentSample& s = tr.at(k, a);
      if (!std::isfinite(s.h_min)) continue;
      if (!pts.empty()) pts += ' ';
      pts += num(px(s.t)) + "," + num(py(s.h_min));
    }
    if (pts.empty()) continue;
    svg << "<polyline fill=\"none\" stroke=\"" << colour(a) << "\" stroke-width=\"1.5\" points=\"" << pts << "\"/>\n";
    svg << "<text x=\"" << w - mr - 80 << "\" y=\"" << mt + 16 * (a + 1) << "\" font-size=\"12\" fill=\""
        << colour(a) << "\">agent " << tr.config.agents[a].id << "</text>\n";
  }
  svg << "</svg>\n";
  out.chart = dir / "h_min.svg";
  write_file(out.chart, svg.str());
  return out;
}

}  // namespace lsecbf
