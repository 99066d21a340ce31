#include "cwlab/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "cwlab/text.hpp"

namespace cwlab {
namespace {

using nlohmann::ordered_json;

ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

// Fixed-point with `digits` decimals, for SVG coordinates.
std::string fixed(double v, int digits = 2) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

ordered_json record_json(const VerificationRecord& r) {
  return ordered_json{{"theorem", r.theorem},
                      {"env", r.env_id},
                      {"n", r.n},
                      {"observed", num(r.observed)},
                      {"target", num(r.target)},
                      {"gap", num(r.gap)},
                      {"x0", r.meta.x0},
                      {"delta", num(r.meta.delta)},
                      {"window", r.meta.window}};
}

ordered_json escape_record(const EscapeEstimate& e) {
  return ordered_json{{"K", e.K},
                      {"exact", num(e.exact)},
                      {"mc", num(e.mc)},
                      {"stderr", num(e.std_error)},
                      {"capped_fraction", num(e.capped_fraction)},
                      {"walkers", e.walkers},
                      {"capped", e.capped},
                      {"step_cap", escape_step_cap(e.K)}};
}

}  // namespace

bool Report::pass() const {
  return std::all_of(summary.begin(), summary.end(), [](const CheckSummary& c) { return !c.asserted || c.pass; });
}

std::vector<std::string> Report::failures() const {
  std::vector<std::string> out;
  for (const auto& c : summary) {
    if (c.asserted && !c.pass) out.push_back(c.id + ": " + c.detail);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string energies_csv(const EnergySeq& e) {
  std::string out = "n,energy\n";
  for (std::size_t n = 0; n < e.energies.size(); ++n) {
    out += std::to_string(n) + "," + text::number(e.energies[n]) + "\n";
  }
  return out;
}

std::string snapshot_csv(const KernelState& s, const EnvWindow& window) {
  std::string out = "x,h_value,occupation\n";
  for (std::int64_t x = s.offset(); x <= s.last_site(); x += 2) {
    const double h = s.at(x);
    out += std::to_string(x) + "," + text::number(h) + "," + text::number(h * window.cbar(x)) + "\n";
  }
  return out;
}

std::string occupancy_csv(const WalkEnsemble& ens) {
  std::string out = "x,count,frequency\n";
  for (std::int64_t x = -ens.n_steps; x <= ens.n_steps; x += 2) {
    out += std::to_string(x) + "," + std::to_string(ens.count(x)) + "," + text::number(ens.frequency(x)) + "\n";
  }
  return out;
}

std::string env_sample_csv(const Environment& env, std::int64_t lo, std::int64_t hi) {
  const EnvWindow w(env, lo, hi);
  std::string out = "x,conductance,cbar,p_left,p_right\n";
  for (std::int64_t x = lo; x <= hi; ++x) {
    out += std::to_string(x) + "," + text::number(w.edge(x)) + "," + text::number(w.cbar(x)) + "," +
           text::number(w.p_left(x)) + "," + text::number(w.p_right(x)) + "\n";
  }
  return out;
}

std::string escape_json(std::span<const EscapeEstimate> estimates) {
  ordered_json arr = ordered_json::array();
  for (const auto& e : estimates) arr.push_back(escape_record(e));
  return arr.dump(2) + "\n";
}

std::string report_csv(std::span<const VerificationRecord> records) {
  std::string out = "theorem,n,observed,target,gap\n";
  for (const auto& r : records) {
    out += r.theorem + "," + std::to_string(r.n) + "," + text::number(r.observed) + "," + text::number(r.target) +
           "," + text::number(r.gap) + "\n";
  }
  return out;
}

std::string report_json(const Report& report) {
  ordered_json j;
  j["env"] = report.env_id;
  j["command"] = report.command;
  const auto& t = report.targets;
  j["targets"] = ordered_json{{"source", t.source},
                              {"window", t.window},
                              {"x0", t.x0},
                              {"mean_cbar", num(t.mean_cbar)},
                              {"mean_inv_c", num(t.mean_inv_c)},
                              {"sigma2", num(t.sigma2)},
                              {"llt_constant", num(t.llt_constant)},
                              {"cbar_integrable", t.integrability.cbar_integrable},
                              {"inv_c_integrable", t.integrability.inv_c_integrable}};
  const auto& tol = report.tolerances;
  j["tolerances"] = ordered_json{{"llt", tol.llt},
                                 {"band_margin", tol.band_margin},
                                 {"ks", tol.ks},
                                 {"tv", tol.tv},
                                 {"regularity_variation", tol.regularity_variation},
                                 {"escape_sigmas", tol.escape_sigmas},
                                 {"cm", tol.cm},
                                 {"cm_agreement", tol.cm_agreement},
                                 {"nash", tol.nash},
                                 {"identity", tol.identity},
                                 {"mass", tol.mass},
                                 {"trend_factor", tol.trend_factor}};
  ordered_json records = ordered_json::array();
  for (const auto& r : report.records) records.push_back(record_json(r));
  j["records"] = std::move(records);
  ordered_json summary = ordered_json::object();
  for (const auto& c : report.summary) {
    summary[c.id] = ordered_json{{"pass", c.pass}, {"asserted", c.asserted}, {"margin", num(c.margin)},
                                 {"detail", c.detail}};
  }
  j["summary"] = std::move(summary);
  ordered_json escapes = ordered_json::array();
  for (const auto& e : report.escapes) escapes.push_back(escape_record(e));
  j["escape"] = std::move(escapes);
  j["failures"] = report.failures();
  j["pass"] = report.pass();
  return j.dump(2) + "\n";
}

std::vector<std::pair<std::string, std::vector<VerificationRecord>>> group_series(
    std::span<const VerificationRecord> records) {
  std::vector<std::pair<std::string, std::vector<VerificationRecord>>> out;
  for (const auto& r : records) {
    std::string stem = r.theorem;
    if (std::isfinite(r.meta.delta)) {
      stem += (r.theorem == checks::kCltConcentration ? "_eps" : "_delta") + text::number(r.meta.delta);
    }
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& g) { return g.first == stem; });
    if (it == out.end()) {
      out.emplace_back(stem, std::vector<VerificationRecord>{});
      it = std::prev(out.end());
    }
    it->second.push_back(r);
  }
  return out;
}

std::string series_svg(const std::string& title, std::span<const VerificationRecord> records) {
  constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  std::vector<double> xs, ys, ts;
  for (const auto& r : records) {
    if (r.n < 1 || !std::isfinite(r.observed)) continue;
    xs.push_back(std::log2(static_cast<double>(r.n)));
    ys.push_back(r.observed);
    if (std::isfinite(r.target)) ts.push_back(r.target);
  }
  double xmin = xs.empty() ? 0.0 : *std::min_element(xs.begin(), xs.end());
  double xmax = xs.empty() ? 1.0 : *std::max_element(xs.begin(), xs.end());
  if (xmax <= xmin) xmax = xmin + 1.0;
  double ymin = 0.0, ymax = 0.0;
  bool first = true;
  for (const auto* v : {&ys, &ts}) {
    for (double y : *v) {
      ymin = first ? y : std::min(ymin, y);
      ymax = first ? y : std::max(ymax, y);
      first = false;
    }
  }
  if (ymax <= ymin) {
    const double pad = ymax == 0.0 ? 1.0 : std::abs(ymax) * 0.1;
    ymin -= pad;
    ymax += pad;
  }
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(W, 0) << "\" height=\"" << fixed(H, 0)
    << "\" viewBox=\"0 0 " << fixed(W, 0) << " " << fixed(H, 0) << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << fixed(W / 2, 0) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
    << escape_xml(title) << "</text>\n";
  s << "<line x1=\"" << fixed(L) << "\" y1=\"" << fixed(H - B) << "\" x2=\"" << fixed(W - R) << "\" y2=\""
    << fixed(H - B) << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << fixed(L) << "\" y1=\"" << fixed(T) << "\" x2=\"" << fixed(L) << "\" y2=\"" << fixed(H - B)
    << "\" stroke=\"black\"/>\n";
  for (const auto& r : records) {
    if (r.n < 1) continue;
    const double x = px(std::log2(static_cast<double>(r.n)));
    s << "<text x=\"" << fixed(x) << "\" y=\"" << fixed(H - B + 16) << "\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"10\">" << r.n << "</text>\n";
  }
  for (double y : {ymin, ymax}) {
    s << "<text x=\"" << fixed(L - 6) << "\" y=\"" << fixed(py(y) + 4) << "\" text-anchor=\"end\" "
      << "font-family=\"sans-serif\" font-size=\"10\">" << escape_xml(text::number(y)) << "</text>\n";
  }
  s << "<text x=\"" << fixed(W / 2, 0) << "\" y=\"" << fixed(H - 12, 0)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">n</text>\n";

  auto polyline = [&](const std::vector<double>& px_, const std::vector<double>& py_, const char* style) {
    s << "<polyline fill=\"none\" " << style << " points=\"";
    for (std::size_t i = 0; i < px_.size(); ++i) s << (i ? " " : "") << fixed(px_[i]) << "," << fixed(py_[i]);
    s << "\"/>\n";
  };
  std::vector<double> ox, oy, tx, ty;
  for (const auto& r : records) {
    if (r.n < 1) continue;
    const double x = px(std::log2(static_cast<double>(r.n)));
    if (std::isfinite(r.observed)) {
      ox.push_back(x);
      oy.push_back(py(r.observed));
    }
    if (std::isfinite(r.target)) {
      tx.push_back(x);
      ty.push_back(py(r.target));
    }
  }
  if (!tx.empty()) polyline(tx, ty, "stroke=\"#c0392b\" stroke-dasharray=\"6,4\"");
  if (!ox.empty()) polyline(ox, oy, "stroke=\"#1f4e9a\" stroke-width=\"2\"");
  for (std::size_t i = 0; i < ox.size(); ++i) {
    s << "<circle cx=\"" << fixed(ox[i]) << "\" cy=\"" << fixed(oy[i]) << "\" r=\"3\" fill=\"#1f4e9a\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace cwlab
