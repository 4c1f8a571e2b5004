#include "seqpgg/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "seqpgg/game.hpp"

namespace seqpgg {

namespace {

std::string fmt(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::vector<ContributionPoint> contribution_summary(const SessionDataset& data,
                                                    const GameConfig& cfg) {
  if (data.rows.empty()) throw DataIntegrityError("dataset is empty");
  struct Acc {
    long n = 0;
    long c = 0;
  };
  std::map<std::tuple<Treatment, int, int>, Acc> acc;
  for (const DecisionRow& r : data.rows) {
    Acc& a = acc[{r.treatment, r.round, r.condition}];
    ++a.n;
    a.c += r.choice;
  }
  const double scale = cfg.n * cfg.endowment;
  std::vector<ContributionPoint> out;
  for (const auto& [key, a] : acc) {
    ContributionPoint p;
    p.treatment = std::get<0>(key);
    p.round = std::get<1>(key);
    p.condition = std::get<2>(key);
    p.n_decisions = a.n;
    p.rate = static_cast<double>(a.c) / a.n;
    p.group_contribution = p.rate * scale;
    const double half = 1.96 * std::sqrt(p.rate * (1.0 - p.rate) / a.n);
    p.ci_lower = std::max(0.0, p.rate - half) * scale;
    p.ci_upper = std::min(1.0, p.rate + half) * scale;
    out.push_back(p);
  }
  return out;
}

double mean_contribution_tokens(const SessionDataset& data, Treatment t,
                                const GameConfig& cfg) {
  long n = 0, c = 0;
  for (const DecisionRow& r : data.rows) {
    if (r.treatment != t) continue;
    ++n;
    c += r.choice;
  }
  if (n == 0) throw DataIntegrityError("no rows for " + to_string(t));
  return cfg.endowment * static_cast<double>(c) / n;
}

namespace {

// Minimal line chart: one series per condition with a shaded 95% band.
void write_svg(const std::string& path, Treatment t,
               const std::vector<ContributionPoint>& points, const GameConfig& cfg) {
  const double width = 640, height = 400;
  const double ml = 50, mr = 16, mt = 28, mb = 40;
  const double ymax = cfg.n * cfg.endowment;
  int rmax = 1;
  for (const auto& p : points) rmax = std::max(rmax, p.round);

  auto sx = [&](double round) {
    return ml + (width - ml - mr) * (rmax > 1 ? (round - 1) / (rmax - 1) : 0.5);
  };
  auto sy = [&](double v) { return height - mb - (height - mt - mb) * (v / ymax); };

  static const char* colors[3] = {"#d62728", "#ff9f1c", "#2a6fdb"};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << ml << "\" y=\"18\" font-family=\"sans-serif\" font-size=\"14\">"
      << "Average group contribution, " << to_string(t) << "</text>\n";

  // axes and gridlines
  for (int g = 0; g <= 4; ++g) {
    const double v = ymax * g / 4.0;
    out << "<line x1=\"" << ml << "\" y1=\"" << fmt(sy(v), 1) << "\" x2=\""
        << width - mr << "\" y2=\"" << fmt(sy(v), 1)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << fmt(sy(v) + 4, 1)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt(v, 0) << "</text>\n";
  }
  for (int round = 1; round <= rmax; ++round) {
    out << "<text x=\"" << fmt(sx(round), 1) << "\" y=\"" << height - mb + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << round << "</text>\n";
  }
  out << "<line x1=\"" << ml << "\" y1=\"" << sy(0) << "\" x2=\"" << width - mr
      << "\" y2=\"" << sy(0) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << sy(0) << "\" x2=\"" << ml << "\" y2=\""
      << mt << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  for (int k = 0; k <= 2; ++k) {
    std::vector<const ContributionPoint*> series;
    for (const auto& p : points)
      if (p.condition == k) series.push_back(&p);
    if (series.empty()) continue;
    std::sort(series.begin(), series.end(),
              [](auto* a, auto* b) { return a->round < b->round; });

    out << "<polygon fill=\"" << colors[k] << "\" fill-opacity=\"0.15\" stroke=\"none\" "
        << "points=\"";
    for (const auto* p : series)
      out << fmt(sx(p->round), 1) << ',' << fmt(sy(p->ci_upper), 1) << ' ';
    for (auto it = series.rbegin(); it != series.rend(); ++it)
      out << fmt(sx((*it)->round), 1) << ',' << fmt(sy((*it)->ci_lower), 1) << ' ';
    out << "\"/>\n";

    out << "<polyline fill=\"none\" stroke=\"" << colors[k]
        << "\" stroke-width=\"2\" points=\"";
    for (const auto* p : series)
      out << fmt(sx(p->round), 1) << ',' << fmt(sy(p->group_contribution), 1) << ' ';
    out << "\"/>\n";

    out << "<text x=\"" << width - mr - 60 << "\" y=\"" << mt + 16 * (k + 1)
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << colors[k]
        << "\">c" << k << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace

std::vector<std::string> report_contributions(const SessionDataset& data,
                                              const GameConfig& cfg,
                                              const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto points = contribution_summary(data, cfg);

  std::vector<std::string> written;
  const std::string csv_path = (fs::path(out_dir) / "contributions.csv").string();
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + csv_path);
    out << "treatment,round,condition,n_decisions,contribution_rate,"
           "group_contribution,ci_lower,ci_upper\n";
    for (const auto& p : points) {
      out << to_string(p.treatment) << ',' << p.round << ",c" << p.condition << ','
          << p.n_decisions << ',' << fmt(p.rate) << ',' << fmt(p.group_contribution)
          << ',' << fmt(p.ci_lower) << ',' << fmt(p.ci_upper) << '\n';
    }
  }
  written.push_back(csv_path);

  for (Treatment t : data.treatments_present()) {
    std::vector<ContributionPoint> series;
    for (const auto& p : points)
      if (p.treatment == t) series.push_back(p);
    const std::string svg_path =
        (fs::path(out_dir) / ("contributions_" + to_string(t) + ".svg")).string();
    write_svg(svg_path, t, series, cfg);
    written.push_back(svg_path);
  }
  return written;
}

}  // namespace seqpgg
