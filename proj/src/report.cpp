#include "fusion/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fusion {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Json averages_json(const Averages& a) {
  return Json{{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
}

Averages averages_from(const Json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("f1").get<double>()};
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

void to_json(Json& j, const MetricsReport& r) {
  Json per_class = Json::array();
  for (std::size_t i = 0; i < r.scores.per_class.size(); ++i) {
    const auto& s = r.scores.per_class[i];
    per_class.push_back({{"class", i},
                         {"name", r.confusion.class_names.at(i)},
                         {"precision", s.precision},
                         {"recall", s.recall},
                         {"f1", s.f1},
                         {"support", s.support},
                         {"precision_defined", s.precision_defined},
                         {"recall_defined", s.recall_defined},
                         {"excluded", s.excluded}});
  }
  Json roc = Json::array();
  for (const auto& c : r.roc) {
    Json points = Json::array();
    for (const auto& p : c.points) points.push_back({p.fpr, p.tpr});
    roc.push_back({{"class", c.class_index}, {"points", points}, {"auc", c.auc}});
  }
  j = Json{{"accuracy", r.accuracy},
           {"per_class", per_class},
           {"macro", averages_json(r.scores.macro)},
           {"micro", averages_json(r.scores.micro)},
           {"weighted", averages_json(r.scores.weighted)},
           {"confusion", r.confusion.counts},
           {"class_names", r.confusion.class_names},
           {"ci", {{"p_hat", r.ci.p_hat}, {"n", r.ci.n}, {"z", r.ci.z}, {"half_width", r.ci.half_width}}},
           {"roc", roc},
           {"trainable_params", r.trainable_params},
           {"wall_seconds", r.wall_seconds},
           {"source_condition", r.source_condition},
           {"target_condition", r.target_condition},
           {"notes", r.notes}};
}

void from_json(const Json& j, MetricsReport& r) {
  r = MetricsReport{};
  j.at("accuracy").get_to(r.accuracy);
  j.at("confusion").get_to(r.confusion.counts);
  j.at("class_names").get_to(r.confusion.class_names);
  for (const auto& pc : j.at("per_class")) {
    ClassScores s;
    pc.at("precision").get_to(s.precision);
    pc.at("recall").get_to(s.recall);
    pc.at("f1").get_to(s.f1);
    pc.at("support").get_to(s.support);
    pc.at("precision_defined").get_to(s.precision_defined);
    pc.at("recall_defined").get_to(s.recall_defined);
    pc.at("excluded").get_to(s.excluded);
    r.scores.per_class.push_back(s);
  }
  r.scores.macro = averages_from(j.at("macro"));
  r.scores.micro = averages_from(j.at("micro"));
  r.scores.weighted = averages_from(j.at("weighted"));
  const auto& ci = j.at("ci");
  r.ci = {ci.at("p_hat").get<double>(), ci.at("n").get<std::int64_t>(), ci.at("z").get<double>(),
          ci.at("half_width").get<double>()};
  for (const auto& c : j.at("roc")) {
    RocCurve curve;
    c.at("class").get_to(curve.class_index);
    c.at("auc").get_to(curve.auc);
    for (const auto& p : c.at("points")) curve.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    r.roc.push_back(std::move(curve));
  }
  j.at("trainable_params").get_to(r.trainable_params);
  j.at("wall_seconds").get_to(r.wall_seconds);
  j.at("source_condition").get_to(r.source_condition);
  j.at("target_condition").get_to(r.target_condition);
  j.at("notes").get_to(r.notes);
}

std::string report_json(const MetricsReport& r) { return Json(r).dump(2) + "\n"; }

std::string report_csv(const MetricsReport& r) {
  std::ostringstream head, row;
  head << "accuracy,ci_half_width,n,macro_precision,macro_recall,macro_f1,micro_precision,"
          "micro_recall,micro_f1,weighted_precision,weighted_recall,weighted_f1";
  row << num(r.accuracy) << ',' << num(r.ci.half_width) << ',' << r.ci.n << ','
      << num(r.scores.macro.precision) << ',' << num(r.scores.macro.recall) << ','
      << num(r.scores.macro.f1) << ',' << num(r.scores.micro.precision) << ','
      << num(r.scores.micro.recall) << ',' << num(r.scores.micro.f1) << ','
      << num(r.scores.weighted.precision) << ',' << num(r.scores.weighted.recall) << ','
      << num(r.scores.weighted.f1);
  for (const auto& c : r.roc) {
    head << ",auc_" << r.confusion.class_names.at(static_cast<std::size_t>(c.class_index));
    row << ',' << num(c.auc);
  }
  head << ",trainable_params,wall_seconds,source_condition,target_condition\n";
  row << ',' << r.trainable_params << ',' << num(r.wall_seconds) << ','
      << csv_field(r.source_condition) << ',' << csv_field(r.target_condition) << '\n';
  return head.str() + row.str();
}

std::string roc_svg(const MetricsReport& r) {
  constexpr double size = 400, pad = 40, plot = size - 2 * pad;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
    << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
  s << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << plot << "\" height=\"" << plot
    << "\" fill=\"none\" stroke=\"#444\"/>\n";
  s << "<line x1=\"" << pad << "\" y1=\"" << pad + plot << "\" x2=\"" << pad + plot << "\" y2=\""
    << pad << "\" stroke=\"#aaa\" stroke-dasharray=\"4 4\"/>\n";
  s << "<text x=\"" << size / 2 << "\" y=\"" << size - 8 << "\" text-anchor=\"middle\" font-size=\"12\">"
       "False positive rate</text>\n";
  s << "<text x=\"12\" y=\"" << size / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
       "transform=\"rotate(-90 12 " << size / 2 << ")\">True positive rate</text>\n";
  for (std::size_t i = 0; i < r.roc.size(); ++i) {
    const auto& c = r.roc[i];
    const auto& name = r.confusion.class_names.at(static_cast<std::size_t>(c.class_index));
    s << "<path class=\"roc\" data-class=\"" << name << "\" fill=\"none\" stroke=\""
      << kPalette[i % std::size(kPalette)] << "\" stroke-width=\"2\" d=\"";
    for (std::size_t p = 0; p < c.points.size(); ++p) {
      s << (p == 0 ? 'M' : 'L') << fixed(pad + c.points[p].fpr * plot) << ','
        << fixed(pad + plot - c.points[p].tpr * plot) << (p + 1 < c.points.size() ? " " : "");
    }
    s << "\"/>\n";
    s << "<text x=\"" << pad + plot - 4 << "\" y=\"" << pad + plot - 8 - 16.0 * static_cast<double>(i)
      << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << kPalette[i % std::size(kPalette)]
      << "\">" << name << " (AUC " << fixed(c.auc, 4) << ")</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string curves_svg(const std::string& title, const std::vector<Series>& series) {
  constexpr double width = 480, height = 320, pad = 40;
  double lo = 0.0, hi = 1.0;
  std::size_t longest = 1;
  for (const auto& [name, values] : series) {
    for (double v : values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    longest = std::max(longest, values.size());
  }
  const double xs = longest > 1 ? (width - 2 * pad) / static_cast<double>(longest - 1) : 0.0;
  const double ys = (height - 2 * pad) / (hi - lo);
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  s << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
    << "</text>\n";
  s << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << width - 2 * pad << "\" height=\""
    << height - 2 * pad << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& [name, values] = series[i];
    if (values.empty()) continue;
    s << "<path class=\"series\" data-name=\"" << name << "\" fill=\"none\" stroke=\""
      << kPalette[i % std::size(kPalette)] << "\" stroke-width=\"2\" d=\"";
    for (std::size_t p = 0; p < values.size(); ++p) {
      s << (p == 0 ? 'M' : 'L') << fixed(pad + static_cast<double>(p) * xs) << ','
        << fixed(height - pad - (values[p] - lo) * ys) << (p + 1 < values.size() ? " " : "");
    }
    s << "\"/>\n";
    s << "<text x=\"" << width - pad - 4 << "\" y=\"" << pad + 14 + 14.0 * static_cast<double>(i)
      << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << kPalette[i % std::size(kPalette)]
      << "\">" << name << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::filesystem::path> render_report(const MetricsReport& r,
                                                 const std::filesystem::path& dir,
                                                 const RenderFormats& formats,
                                                 const std::string& stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  if (formats.json) {
    written.push_back(dir / (stem + ".json"));
    write_text(written.back(), report_json(r));
  }
  if (formats.csv) {
    written.push_back(dir / (stem + ".csv"));
    write_text(written.back(), report_csv(r));
  }
  if (formats.svg) {
    written.push_back(dir / (stem + "_roc.svg"));
    write_text(written.back(), roc_svg(r));
  }
  return written;
}

MetricsReport load_report(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text(path)).get<MetricsReport>();
  } catch (const Json::exception& e) {
    throw DataError(path.string() + ": malformed report: " + e.what());
  }
}

}  // namespace fusion
