#include "bcgsleep/report.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>

namespace bcgsleep {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(int width, int height) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
         std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) + " " + std::to_string(height) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text_at(double x, double y, const std::string& s, const char* anchor = "start") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor + "\">" + escape(s) + "</text>\n";
}

std::string line(double x1, double y1, double x2, double y2, const char* stroke, double width = 1.0) {
  return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
         "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"/>\n";
}

// Wake at the top, deep at the bottom.
double stage_row(Stage s) { return static_cast<double>(stage_code(s)); }

std::string hypnogram_panel(std::span<const std::optional<Stage>> stages, double top, double left, double width,
                            double height, const std::string& label, const char* colour) {
  std::string out = text_at(left, top - 6, label);
  const double row_h = height / (kStageCount - 1);
  for (Stage s : kAllStages) {
    const double y = top + stage_row(s) * row_h;
    out += text_at(left - 8, y + 4, std::string(stage_name(s)), "end");
    out += line(left, y, left + width, y, "#dddddd");
  }
  const double n = std::max<double>(1.0, static_cast<double>(stages.size()));
  std::string path;
  std::optional<Stage> prev;
  for (std::size_t i = 0; i <= stages.size(); ++i) {
    const std::optional<Stage> cur = i < stages.size() ? stages[i] : std::nullopt;
    if (i < stages.size() && cur == prev) continue;
    const double x = left + width * static_cast<double>(i) / n;
    if (prev) path += "H" + num(x);
    if (cur) {
      const double y = top + stage_row(*cur) * row_h;
      path += prev ? "V" + num(y) : "M" + num(x) + " " + num(y);
    }
    prev = cur;
  }
  if (!path.empty()) {
    out += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"1.5\"/>\n";
  }
  return out;
}

}  // namespace

std::string render_hypnogram_pair_svg(std::span<const SecondLabel> reference, std::span<const Stage> predicted,
                                      const std::string& title) {
  const int width = 900;
  const int height = 420;
  const double left = 70;
  const double plot_w = width - left - 20;
  std::string out = header(width, height);
  out += text_at(width / 2.0, 20, title, "middle");
  out += hypnogram_panel(reference, 60, left, plot_w, 120, "reference", "#1f77b4");
  std::vector<std::optional<Stage>> pred(predicted.begin(), predicted.end());
  out += hypnogram_panel(pred, 240, left, plot_w, 120, "predicted", "#d62728");
  const double hours = static_cast<double>(std::max(reference.size(), predicted.size())) / 3600.0;
  out += text_at(left, 400, "0 h");
  out += text_at(left + plot_w, 400, num(hours) + " h", "end");
  out += "</svg>\n";
  return out;
}

std::string render_confusion_svg(const ConfusionMatrix& cm, const std::string& title) {
  const int cell = 80;
  const int left = 110;
  const int top = 70;
  std::string out = header(left + kStageCount * cell + 30, top + kStageCount * cell + 50);
  out += text_at(left + kStageCount * cell / 2.0, 20, title, "middle");
  out += text_at(left + kStageCount * cell / 2.0, 45, "reference", "middle");
  const auto peak = std::max<std::int64_t>(1, cm.maxCoeff());
  for (Stage p : kAllStages) {
    const int r = stage_code(p);
    out += text_at(left - 8, top + r * cell + cell / 2.0 + 4, "pred " + std::string(stage_name(p)), "end");
    for (Stage t : kAllStages) {
      const int c = stage_code(t);
      if (r == 0) out += text_at(left + c * cell + cell / 2.0, top - 8, std::string(stage_name(t)), "middle");
      const double shade = static_cast<double>(cm(r, c)) / static_cast<double>(peak);
      const int level = 255 - static_cast<int>(shade * 200.0);
      char fill[16];
      std::snprintf(fill, sizeof fill, "#%02x%02xff", level, level);
      out += "<rect x=\"" + std::to_string(left + c * cell) + "\" y=\"" + std::to_string(top + r * cell) +
             "\" width=\"" + std::to_string(cell) + "\" height=\"" + std::to_string(cell) + "\" fill=\"" + fill +
             "\" stroke=\"#888888\"/>\n";
      out += text_at(left + c * cell + cell / 2.0, top + r * cell + cell / 2.0 + 4, std::to_string(cm(r, c)), "middle");
    }
  }
  out += "</svg>\n";
  return out;
}

std::string render_efficiency_box_svg(const EfficiencySummary& summary) {
  const int width = 420;
  const int height = 360;
  const double top = 40;
  const double bottom = 310;
  const auto y_of = [&](double v) { return bottom - (bottom - top) * std::clamp(v, 0.0, 1.0); };
  std::string out = header(width, height);
  out += text_at(width / 2.0, 20, "sleep efficiency", "middle");
  for (int k = 0; k <= 10; k += 2) {
    const double v = k / 10.0;
    out += line(55, y_of(v), width - 20, y_of(v), "#eeeeee");
    out += text_at(50, y_of(v) + 4, num(v), "end");
  }
  const auto box = [&](const BoxStats& b, double cx, const std::string& label, const char* colour) {
    std::string s;
    s += line(cx, y_of(b.min), cx, y_of(b.q1), "#333333");
    s += line(cx, y_of(b.q3), cx, y_of(b.max), "#333333");
    s += line(cx - 20, y_of(b.min), cx + 20, y_of(b.min), "#333333");
    s += line(cx - 20, y_of(b.max), cx + 20, y_of(b.max), "#333333");
    s += "<rect x=\"" + num(cx - 40) + "\" y=\"" + num(y_of(b.q3)) + "\" width=\"80\" height=\"" +
         num(y_of(b.q1) - y_of(b.q3)) + "\" fill=\"" + colour + "\" stroke=\"#333333\"/>\n";
    s += line(cx - 40, y_of(b.median), cx + 40, y_of(b.median), "#000000", 2.0);
    s += text_at(cx, bottom + 20, label, "middle");
    return s;
  };
  out += box(summary.bcg, 150, "BCG", "#aec7e8");
  out += box(summary.reference, 300, "reference", "#ffbb78");
  out += text_at(width / 2.0, bottom + 42,
                 "r = " + num(summary.correlation.r) + ", p = " + num(summary.correlation.p) + ", n = " +
                     std::to_string(summary.nights.size()),
                 "middle");
  out += "</svg>\n";
  return out;
}

std::string render_threshold_trace_svg(std::span<const MaybeValue> raw_hr, std::span<const SleepWakeEpoch> epochs,
                                       Seconds from_t, Seconds to_t) {
  from_t = std::clamp<Seconds>(from_t, 0, static_cast<Seconds>(raw_hr.size()));
  to_t = std::clamp<Seconds>(to_t, from_t, static_cast<Seconds>(raw_hr.size()));
  const int width = 900;
  const int height = 360;
  const double left = 60;
  const double right = width - 20;
  const double top = 40;
  const double bottom = 300;
  double lo = 1e9;
  double hi = -1e9;
  for (Seconds t = from_t; t < to_t; ++t) {
    if (const auto& v = raw_hr[static_cast<std::size_t>(t)]; v && *v > 0.0) {
      lo = std::min(lo, *v);
      hi = std::max(hi, *v);
    }
  }
  for (const auto& e : epochs) {
    if (e.threshold && e.start_t >= from_t && e.start_t < to_t) {
      lo = std::min(lo, *e.threshold);
      hi = std::max(hi, *e.threshold);
    }
  }
  if (lo > hi) {
    lo = 0;
    hi = 1;
  }
  lo = std::floor(lo - 2);
  hi = std::ceil(hi + 2);
  const double span_t = std::max<double>(1.0, static_cast<double>(to_t - from_t));
  const auto x_of = [&](double t) { return left + (right - left) * (t - static_cast<double>(from_t)) / span_t; };
  const auto y_of = [&](double v) { return bottom - (bottom - top) * (v - lo) / (hi - lo); };

  std::string out = header(width, height);
  out += text_at(width / 2.0, 20, "heart rate (1 Hz) vs sleep/wake threshold (per 30 s epoch)", "middle");
  out += text_at(left - 6, y_of(hi) + 4, num(hi), "end");
  out += text_at(left - 6, y_of(lo) + 4, num(lo), "end");
  for (const auto& e : epochs) {
    if (e.start_t < from_t || e.start_t >= to_t || e.state != WakeState::Awake) continue;
    out += "<rect x=\"" + num(x_of(static_cast<double>(e.start_t))) + "\" y=\"" + num(top) + "\" width=\"" +
           num(x_of(static_cast<double>(e.start_t + 30)) - x_of(static_cast<double>(e.start_t))) + "\" height=\"" +
           num(bottom - top) + "\" fill=\"#fde0dd\"/>\n";
  }
  std::string hr_path;
  bool pen = false;
  for (Seconds t = from_t; t < to_t; ++t) {
    const auto& v = raw_hr[static_cast<std::size_t>(t)];
    if (!v || *v <= 0.0) {
      pen = false;
      continue;
    }
    hr_path += (pen ? "L" : "M") + num(x_of(static_cast<double>(t))) + " " + num(y_of(*v));
    pen = true;
  }
  out += "<path d=\"" + hr_path + "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\"/>\n";
  std::string thr_path;
  for (const auto& e : epochs) {
    if (!e.threshold || e.start_t < from_t || e.start_t >= to_t) continue;
    const double y = y_of(*e.threshold);
    thr_path += "M" + num(x_of(static_cast<double>(e.start_t))) + " " + num(y) + "H" +
                num(x_of(static_cast<double>(std::min<Seconds>(e.start_t + 30, to_t))));
  }
  out += "<path d=\"" + thr_path + "\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
  out += text_at(left, bottom + 20, std::to_string(from_t) + " s");
  out += text_at(right, bottom + 20, std::to_string(to_t) + " s", "end");
  out += "</svg>\n";
  return out;
}

}  // namespace bcgsleep
