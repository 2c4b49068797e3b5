#include "stancepipe/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "stancepipe/csv.hpp"
#include "stancepipe/errors.hpp"
#include "stancepipe/log.hpp"
#include "stancepipe/text.hpp"

namespace stancepipe {

PolarityDistribution polarity_distribution(std::span<const UserPolarity::Value> users) {
  PolarityDistribution d;
  for (auto v : users) {
    ++d.n_analyzed;
    switch (v) {
      case UserPolarity::Value::positive: ++d.n_positive; break;
      case UserPolarity::Value::negative: ++d.n_negative; break;
      case UserPolarity::Value::neutral: ++d.n_neutral; break;
      case UserPolarity::Value::unassigned: break;
    }
  }
  d.n_polarized = d.n_positive + d.n_negative + d.n_neutral;
  return d;
}

const char* to_string(BreakdownDimension d) {
  switch (d) {
    case BreakdownDimension::gender: return "gender";
    case BreakdownDimension::age_bucket: return "age_bucket";
    case BreakdownDimension::ethnicity: return "ethnicity";
    case BreakdownDimension::region: return "region";
    case BreakdownDimension::city: return "city";
    case BreakdownDimension::country: return "country";
  }
  return "gender";
}

std::optional<std::string> category_of(const DemographicRecord& r, BreakdownDimension dimension) {
  switch (dimension) {
    case BreakdownDimension::gender:
      if (r.gender.value == Gender::unknown) return std::nullopt;
      return to_string(r.gender.value);
    case BreakdownDimension::age_bucket:
      if (r.age.bucket == AgeBucket::unknown) return std::nullopt;
      return to_string(r.age.bucket);
    case BreakdownDimension::ethnicity:
      if (!r.ethnicity.assigned()) return std::nullopt;
      return r.ethnicity.label;
    case BreakdownDimension::region: return r.location.region;
    case BreakdownDimension::city: return r.location.city;
    case BreakdownDimension::country: return r.location.country;
  }
  return std::nullopt;
}

namespace {

void tally(BreakdownRow& row, UserPolarity::Value v) {
  if (v == UserPolarity::Value::positive) ++row.n_positive;
  else if (v == UserPolarity::Value::negative) ++row.n_negative;
  else if (v == UserPolarity::Value::neutral) ++row.n_neutral;
}

std::string pct(double v) { return csv::fixed(v, 2); }

}  // namespace

DemographicBreakdown breakdown(std::span<const AnnotatedUser> users, BreakdownDimension dimension,
                               std::size_t top_k) {
  DemographicBreakdown out;
  out.dimension = dimension;
  std::map<std::string, BreakdownRow> groups;
  for (const auto& u : users) {
    if (u.polarity == UserPolarity::Value::unassigned) continue;
    auto category = category_of(u.demographics, dimension);
    if (!category || category->empty()) {
      ++out.excluded;
      continue;
    }
    auto& row = groups[*category];
    row.category = *category;
    tally(row, u.polarity);
  }
  std::vector<BreakdownRow> rows;
  for (auto& [name, row] : groups) rows.push_back(row);
  std::stable_sort(rows.begin(), rows.end(),
                   [](const BreakdownRow& a, const BreakdownRow& b) { return a.total() > b.total(); });
  if (rows.size() > top_k) {
    BreakdownRow others{kOthersCategory};
    for (std::size_t i = top_k; i < rows.size(); ++i) {
      others.n_positive += rows[i].n_positive;
      others.n_negative += rows[i].n_negative;
      others.n_neutral += rows[i].n_neutral;
    }
    rows.resize(top_k);
    rows.push_back(others);
  }
  out.rows = std::move(rows);
  return out;
}

std::optional<double> predicted_yes_share(std::span<const UserPolarity::Value> users) {
  std::size_t pos = 0, neg = 0;
  for (auto v : users) {
    if (v == UserPolarity::Value::positive) ++pos;
    else if (v == UserPolarity::Value::negative) ++neg;
  }
  if (pos + neg == 0) return std::nullopt;
  return 100.0 * static_cast<double>(pos) / static_cast<double>(pos + neg);
}

std::vector<YesShareRow> yes_shares_by_location(std::span<const AnnotatedUser> users, BreakdownDimension level) {
  std::map<std::string, std::vector<UserPolarity::Value>> groups;
  for (const auto& u : users) {
    auto where = category_of(u.demographics, level);
    if (where && !where->empty()) groups[*where].push_back(u.polarity);
  }
  std::vector<YesShareRow> rows;
  for (const auto& [location, values] : groups) {
    auto share = predicted_yes_share(values);
    if (!share) {
      log::warn("no positive or negative users in '" + location + "'; yes share omitted");
      continue;
    }
    YesShareRow row{location, 0, 0, *share};
    for (auto v : values) {
      if (v == UserPolarity::Value::positive) ++row.n_positive;
      else if (v == UserPolarity::Value::negative) ++row.n_negative;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<OfficialResult> load_official_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open official results '" + path.string() + "'");
  std::vector<OfficialResult> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = csv::parse_line(line);
    if (!fields || fields->size() != 3) throw ParseError(path.string(), lineno, "expected location,official_yes_pct,turnout_pct");
    const auto& f = *fields;
    if (out.empty() && trim(f[0]) == "location") continue;
    OfficialResult r;
    r.location = trim(f[0]);
    std::size_t used1 = 0, used2 = 0;
    try {
      r.official_yes_pct = std::stod(trim(f[1]), &used1);
      r.turnout_pct = std::stod(trim(f[2]), &used2);
    } catch (const std::exception&) {
      throw ParseError(path.string(), lineno, "percentages must be numeric");
    }
    if (used1 != trim(f[1]).size() || used2 != trim(f[2]).size())
      throw ParseError(path.string(), lineno, "percentages must be numeric");
    if (r.location.empty()) throw ParseError(path.string(), lineno, "empty location");
    if (r.official_yes_pct < 0 || r.official_yes_pct > 100 || r.turnout_pct < 0 || r.turnout_pct > 100)
      throw ParseError(path.string(), lineno, "percentages must lie in [0, 100]");
    out.push_back(std::move(r));
  }
  return out;
}

ComparisonResult compare_official(std::span<const YesShareRow> predicted, std::span<const OfficialResult> official) {
  std::unordered_map<std::string, const OfficialResult*> by_key;
  for (const auto& o : official) by_key.emplace(fold_key(o.location), &o);
  std::unordered_map<std::string, bool> used;
  ComparisonResult out;
  for (const auto& p : predicted) {
    const auto key = fold_key(p.location);
    auto it = by_key.find(key);
    if (it == by_key.end()) {
      out.predicted_unmatched.push_back(p.location);
      continue;
    }
    used[key] = true;
    out.matched.push_back(
        OfficialComparison{p.location, p.yes_pct, it->second->official_yes_pct, it->second->turnout_pct});
  }
  for (const auto& o : official)
    if (!used.count(fold_key(o.location))) out.official_unmatched.push_back(o.location);
  return out;
}

std::string distribution_csv(const PolarityDistribution& d) {
  std::ostringstream out;
  csv::write_row(out, {"n_positive", "n_negative", "n_neutral", "n_polarized", "n_analyzed"});
  csv::write_row(out, {std::to_string(d.n_positive), std::to_string(d.n_negative), std::to_string(d.n_neutral),
                       std::to_string(d.n_polarized), std::to_string(d.n_analyzed)});
  return out.str();
}

std::string breakdown_csv(const DemographicBreakdown& b) {
  std::ostringstream out;
  csv::write_row(out, {to_string(b.dimension), "n_positive", "n_negative", "n_neutral", "total"});
  for (const auto& r : b.rows)
    csv::write_row(out, {r.category, std::to_string(r.n_positive), std::to_string(r.n_negative),
                         std::to_string(r.n_neutral), std::to_string(r.total())});
  csv::write_row(out, {"(excluded)", "", "", "", std::to_string(b.excluded)});
  return out.str();
}

std::string yes_share_csv(std::span<const YesShareRow> rows) {
  std::ostringstream out;
  csv::write_row(out, {"location", "n_positive", "n_negative", "predicted_yes_pct"});
  for (const auto& r : rows)
    csv::write_row(out, {r.location, std::to_string(r.n_positive), std::to_string(r.n_negative), pct(r.yes_pct)});
  return out.str();
}

std::string comparison_csv(const ComparisonResult& c) {
  std::ostringstream out;
  csv::write_row(out, {"location", "predicted_yes_pct", "official_yes_pct", "turnout_pct"});
  for (const auto& r : c.matched)
    csv::write_row(out, {r.location, pct(r.predicted_yes_pct), pct(r.official_yes_pct), pct(r.turnout_pct)});
  return out.str();
}

std::string filtering_csv(const FilteringCounts& f) {
  std::ostringstream out;
  csv::write_row(out, {"total_users_collected", "users_after_outlier_analysis", "users_after_bot_analysis"});
  csv::write_row(out, {std::to_string(f.collected), std::to_string(f.after_outliers), std::to_string(f.after_bots)});
  return out.str();
}

namespace {

std::string unmatched_csv(const ComparisonResult& c) {
  std::ostringstream out;
  csv::write_row(out, {"location", "side"});
  for (const auto& l : c.predicted_unmatched) csv::write_row(out, {l, "predicted_only"});
  for (const auto& l : c.official_unmatched) csv::write_row(out, {l, "official_only"});
  return out.str();
}

std::string predictor_csv(std::span<const PredictorReport> reports) {
  std::ostringstream out;
  write_predictor_metrics_csv(out, reports);
  return out.str();
}

std::string share_of(std::size_t part, std::size_t whole) {
  return whole == 0 ? "n/a" : pct(100.0 * static_cast<double>(part) / static_cast<double>(whole)) + "%";
}

}  // namespace

std::string render_text(const ReportBundle& b) {
  std::ostringstream out;
  out << "[filtering]\n"
      << "total_users_collected = " << b.filtering.collected << '\n'
      << "users_after_outlier_analysis = " << b.filtering.after_outliers << '\n'
      << "users_after_bot_analysis = " << b.filtering.after_bots << "\n\n";

  out << "[predictors]\n";
  for (const auto& r : b.predictors) {
    out << r.name << ".test = precision " << csv::fixed(r.test.precision, 3) << ", recall "
        << csv::fixed(r.test.recall, 3) << ", f_score " << csv::fixed(r.test.f_score, 3) << ", accuracy "
        << csv::fixed(r.test.accuracy, 3) << '\n';
    out << r.name << ".cv_mean_accuracy = " << csv::fixed(r.cv.mean.accuracy, 3) << " (" << r.cv.folds.size()
        << " folds)\n";
  }
  out << '\n';

  const auto& d = b.distribution;
  out << "[polarity]\n"
      << "positive = " << d.n_positive << " (" << share_of(d.n_positive, d.n_polarized) << ")\n"
      << "negative = " << d.n_negative << " (" << share_of(d.n_negative, d.n_polarized) << ")\n"
      << "neutral = " << d.n_neutral << " (" << share_of(d.n_neutral, d.n_polarized) << ")\n"
      << "polarized = " << d.n_polarized << " (" << share_of(d.n_polarized, d.n_analyzed) << " of analyzed)\n"
      << "analyzed = " << d.n_analyzed << "\n\n";

  for (const auto& br : b.breakdowns) {
    out << "[breakdown." << to_string(br.dimension) << "]\n";
    for (const auto& r : br.rows)
      out << r.category << " = positive " << r.n_positive << ", negative " << r.n_negative << ", neutral "
          << r.n_neutral << '\n';
    out << "excluded = " << br.excluded << "\n\n";
  }

  for (const auto& [level, rows] : b.yes_shares) {
    out << "[yes_share." << to_string(level) << "]\n";
    for (const auto& r : rows) out << r.location << " = " << pct(r.yes_pct) << '\n';
    out << '\n';
  }

  out << "[official_comparison]\n";
  for (const auto& r : b.comparison.matched)
    out << r.location << " = predicted " << pct(r.predicted_yes_pct) << ", official " << pct(r.official_yes_pct)
        << ", turnout " << pct(r.turnout_pct) << '\n';
  for (const auto& l : b.comparison.predicted_unmatched) out << l << " = predicted only\n";
  for (const auto& l : b.comparison.official_unmatched) out << l << " = official only\n";
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

std::vector<std::filesystem::path> emit(const ReportBundle& bundle, const std::filesystem::path& dir,
                                        ReportFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create report directory '" + dir.string() + "': " + ec.message());
  std::vector<std::pair<std::string, std::string>> files;
  if (format == ReportFormat::structured_text) {
    files.emplace_back("report.txt", render_text(bundle));
  } else {
    files.emplace_back("filtering.csv", filtering_csv(bundle.filtering));
    files.emplace_back("predictor_metrics.csv", predictor_csv(bundle.predictors));
    files.emplace_back("polarity_distribution.csv", distribution_csv(bundle.distribution));
    for (const auto& br : bundle.breakdowns)
      files.emplace_back(std::string("breakdown_") + to_string(br.dimension) + ".csv", breakdown_csv(br));
    for (const auto& [level, rows] : bundle.yes_shares)
      files.emplace_back(std::string("yes_share_") + to_string(level) + ".csv", yes_share_csv(rows));
    files.emplace_back("official_comparison.csv", comparison_csv(bundle.comparison));
    files.emplace_back("official_unmatched.csv", unmatched_csv(bundle.comparison));
  }
  std::sort(files.begin(), files.end());
  std::vector<std::filesystem::path> written;
  for (const auto& [name, content] : files) {
    write_text_file(dir / name, content);
    written.push_back(dir / name);
  }
  return written;
}

}  // namespace stancepipe
