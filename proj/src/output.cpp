#include "levyclock/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "levyclock/asymptotics.hpp"
#include "levyclock/config.hpp"
#include "levyclock/errors.hpp"

namespace levyclock {

namespace {

class CsvWriter {
 public:
  explicit CsvWriter(std::initializer_list<const char*> header) {
    bool first = true;
    for (const char* h : header) {
      if (!first) out_ << ',';
      out_ << h;
      first = false;
    }
    out_ << '\n';
  }

  CsvWriter& real(double x) { return cell(format_real(x)); }
  CsvWriter& count(std::size_t n) { return cell(std::to_string(n)); }
  CsvWriter& flag(bool b) { return cell(b ? "true" : "false"); }
  CsvWriter& text(const std::string& s) { return cell(csv_escape(s)); }
  void end_row() {
    out_ << '\n';
    first_ = true;
  }

  std::string str() const { return out_.str(); }

 private:
  CsvWriter& cell(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
  }

  std::ostringstream out_;
  bool first_ = true;
};

nlohmann::json real_json(double x) {
  if (std::isfinite(x)) return x;
  return format_real(x);
}

}  // namespace

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0.0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string samples_csv(const MCResult& result) {
  const SampleTable& s = result.samples;
  CsvWriter w({"batch", "path", "t", "value", "clock_time", "subordinated_time"});
  for (std::size_t b = 0; b < s.batches; ++b) {
    for (std::size_t i = 0; i < s.n_paths; ++i) {
      for (std::size_t k = 0; k < s.times.size(); ++k) {
        const std::size_t at = s.index(b, i, k);
        w.count(b).count(i).real(s.times[k]).real(s.values[at]).real(s.clock_times[at])
            .real(s.subordinated_times[at]).end_row();
      }
    }
  }
  return w.str();
}

std::string summary_csv(const MCResult& result) {
  CsvWriter w({"t", "n", "mean", "variance", "skewness", "kurtosis", "se_mean", "se_variance",
               "se_skewness", "se_kurtosis", "ratio_mean", "ratio_se"});
  for (const auto& ts : result.summaries) {
    const auto& s = ts.summary;
    w.real(ts.t).count(s.n).real(s.mean).real(s.variance).real(s.skewness).real(s.kurtosis)
        .real(s.se_mean).real(s.se_variance).real(s.se_skewness).real(s.se_kurtosis)
        .real(ts.ratio_mean).real(ts.ratio_se).end_row();
  }
  return w.str();
}

std::string tests_csv(const MCResult& result) {
  CsvWriter w({"t", "name", "batch", "statistic", "p_value", "n", "passed"});
  for (const auto& r : result.tests) {
    w.real(r.t).text(r.name).count(r.batch).real(r.statistic).real(r.p_value).count(r.n)
        .flag(r.passed).end_row();
  }
  return w.str();
}

std::string prediction_csv(const MCResult& result) {
  CsvWriter w({"quantity", "value", "holds", "detail"});
  const auto& p = result.prediction;
  w.text("mean_rate").real(p.mean_rate).flag(result.prediction_available).text("").end_row();
  w.text("variance_rate").real(p.variance_rate).flag(result.prediction_available).text("").end_row();
  for (const auto& h : p.hypotheses) w.text(h.name).real(std::nan("")).flag(h.holds).text(h.detail).end_row();
  return w.str();
}

std::string moments_csv(const MCResult& result) {
  CsvWriter w({"t", "mc_mean", "se_mean", "exact_mean", "mc_variance", "se_variance",
               "exact_variance"});
  for (const auto& m : result.moments) {
    w.real(m.t).real(m.mc_mean).real(m.se_mean).real(m.exact_mean).real(m.mc_variance)
        .real(m.se_variance).real(m.exact_variance).end_row();
  }
  return w.str();
}

std::string sweep_csv(const MCResult& result) {
  CsvWriter w({"t", "mean", "se", "baseline_mean", "baseline_se", "ma_ratio"});
  for (const auto& r : result.sweep) {
    w.real(r.t).real(r.mean).real(r.se).real(r.baseline_mean).real(r.baseline_se).real(r.ma_ratio)
        .end_row();
  }
  return w.str();
}

std::string normality_csv(const MCResult& result) {
  CsvWriter w({"t", "n", "pooled_mean", "pooled_variance", "sw_passes", "batches", "passed"});
  for (const auto& r : result.normality) {
    w.real(r.t).count(r.standardized.size()).real(r.pooled_mean).real(r.pooled_variance)
        .count(r.sw_passes).count(result.samples.batches).flag(r.passed).end_row();
  }
  return w.str();
}

std::string histogram_csv(const MCResult& result) {
  CsvWriter w({"t", "bin_lower", "bin_upper", "count", "density"});
  for (const auto& r : result.normality) {
    const auto& h = r.histogram;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      w.real(r.t).real(h.edges[i]).real(h.edges[i + 1]).count(h.counts[i]).real(h.density[i])
          .end_row();
    }
  }
  return w.str();
}

std::string kde_csv(const MCResult& result) {
  CsvWriter w({"t", "x", "density"});
  for (const auto& r : result.normality) {
    for (std::size_t i = 0; i < r.kde_grid.size(); ++i) {
      w.real(r.t).real(r.kde_grid[i]).real(r.kde_density[i]).end_row();
    }
  }
  return w.str();
}

std::string stationary_csv(const MCResult& result) {
  CsvWriter w({"power", "stationary", "quadrature", "closed_form", "mc_mean", "mc_se",
               "relative_error"});
  for (const auto& r : result.stationary) {
    w.real(r.power).real(r.stationary).real(r.quadrature).real(r.closed_form).real(r.mc_mean)
        .real(r.mc_se).real(r.relative_error).end_row();
  }
  return w.str();
}

std::string stationary_density_csv(const MCResult& result) {
  CsvWriter w({"r", "density"});
  for (const auto& [r, f] : result.stationary_density) w.real(r).real(f).end_row();
  return w.str();
}

std::string manifest_json(const MCResult& result, const std::vector<std::string>& files) {
  nlohmann::json doc;
  doc["name"] = result.config.name;
  doc["config_hash"] = result.config_hash;
  doc["seed"] = result.config.seed;
  doc["code_version"] = result.code_version;
  doc["experiment"] = to_string(result.config.kind);
  doc["n_paths"] = result.config.n_paths;
  doc["batches"] = result.config.batches;
  doc["all_tests_passed"] = result.all_tests_passed();
  doc["prediction"] = {{"mean_rate", real_json(result.prediction.mean_rate)},
                       {"variance_rate", real_json(result.prediction.variance_rate)}};
  doc["warnings"] = result.warnings;
  if (result.normality_refusal) doc["normality_refusal"] = *result.normality_refusal;
  doc["files"] = files;
  doc["config"] = config_to_json(result.config);
  // Where the files landed is not part of the result.
  doc["config"]["output"].erase("directory");
  return doc.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::vector<std::string> write_result(const MCResult& result,
                                      const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw std::runtime_error(directory.string() + ": " + ec.message());

  std::vector<std::pair<std::string, std::string>> tables;
  if (result.config.output.write_samples) tables.emplace_back("samples.csv", samples_csv(result));
  tables.emplace_back("summary.csv", summary_csv(result));
  tables.emplace_back("tests.csv", tests_csv(result));
  tables.emplace_back("prediction.csv", prediction_csv(result));
  if (!result.moments.empty()) tables.emplace_back("moments.csv", moments_csv(result));
  if (!result.sweep.empty()) tables.emplace_back("sweep.csv", sweep_csv(result));
  if (!result.normality.empty()) {
    tables.emplace_back("normality.csv", normality_csv(result));
    tables.emplace_back("histogram.csv", histogram_csv(result));
    tables.emplace_back("kde.csv", kde_csv(result));
  }
  if (!result.stationary.empty()) tables.emplace_back("stationary.csv", stationary_csv(result));
  if (!result.stationary_density.empty()) {
    tables.emplace_back("stationary_density.csv", stationary_density_csv(result));
  }

  std::vector<std::string> names;
  for (const auto& [name, text] : tables) {
    write_text_file(directory / name, text);
    names.push_back(name);
  }
  write_text_file(directory / "manifest.json", manifest_json(result, names));
  names.push_back("manifest.json");
  return names;
}

std::string closed_form_csv(const ProcessSpec& spec, const std::vector<double>& times) {
  const AsymptoticPrediction pred = predict(spec);
  CsvWriter w({"t", "clock_mean", "clock_variance", "mean", "variance", "predicted_mean",
               "predicted_variance"});
  for (double t : times) {
    double u = t;
    double v = 0.0;
    if (spec.clock) {
      const CIRParams cir = spec.clock->params.cir();
      u = icir_mean(t, cir);
      v = spec.clock->params.alpha == 0.5 ? icir_variance(t, cir) : std::nan("");
    }
    const auto exact = exact_moments(spec, t);
    w.real(t).real(u).real(v).real(exact ? exact->mean : std::nan(""))
        .real(exact ? exact->variance : std::nan("")).real(pred.mean_rate * t)
        .real(pred.variance_rate * t).end_row();
  }
  return w.str();
}

std::string stationary_moments_csv(const CKLSParams& params) {
  const CklsStationary law(params);
  CsvWriter w({"power", "stationary", "quadrature", "closed_form"});
  std::vector<double> powers{1.0, 2.0 * params.alpha, 2.0};
  std::sort(powers.begin(), powers.end());
  powers.erase(std::unique(powers.begin(), powers.end()), powers.end());
  for (double p : powers) {
    try {
      const auto m = law.moment(p);
      w.real(p).real(m.value()).real(m.quadrature).real(m.closed_form.value_or(std::nan("")))
          .end_row();
    } catch (const DomainError&) {
      const double inf = std::numeric_limits<double>::infinity();
      w.real(p).real(inf).real(inf).real(inf).end_row();
    }
  }
  return w.str();
}

std::string stationary_density_table_csv(const CKLSParams& params) {
  const CklsStationary law(params);
  CsvWriter w({"r", "density"});
  constexpr int kPoints = 241;
  for (int i = 0; i < kPoints; ++i) {
    const double r = params.eta * std::exp(std::log(1e-3) + std::log(1e4) * i / (kPoints - 1));
    w.real(r).real(law.density(r)).end_row();
  }
  return w.str();
}

}  // namespace levyclock
