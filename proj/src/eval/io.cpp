#include "aegis/eval/io.hpp"

#include <charconv>
#include <filesystem>
#include <map>
#include <sstream>

#include "aegis/error.hpp"
#include "aegis/eval/stats.hpp"
#include "aegis/util.hpp"

namespace aegis::eval {

using nlohmann::json;

namespace {

std::string read_or_io_error(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw Error(Errc::IoError, "cannot read " + path);
  return util::read_file(path);
}

long parse_int(const std::string& s, const std::string& what) {
  const std::string t = util::trim(s);
  long v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw Error(Errc::OutOfRange, what + " is not an integer: '" + t + "'");
  return v;
}

double parse_double(const std::string& s, const std::string& what) {
  const std::string t = util::trim(s);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::OutOfRange, what + " is not a number: '" + t + "'");
  }
}

std::optional<double> safe_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  try {
    return pearson_correlation(x, y);
  } catch (const Error& e) {
    if (e.code() == Errc::DegenerateInput) return std::nullopt;
    throw;
  }
}

std::map<std::string, const RubricRecord*> rubric_index(const std::vector<RubricRecord>& rubric) {
  std::map<std::string, const RubricRecord*> out;
  for (const auto& r : rubric) out[r.case_id] = &r;
  return out;
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field.push_back(c);
      any = true;
    }
  }
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

std::vector<ExpertThreat> expert_corpus_from_json(const json& doc) {
  if (!doc.is_array()) throw Error(Errc::MissingKey, "expert corpus must be a JSON array");
  std::vector<ExpertThreat> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const std::string where = "expert threat " + std::to_string(i);
    for (const char* key : {"case_id", "threat_type", "text"})
      if (!item.is_object() || !item.contains(key) || !item[key].is_string())
        throw Error(Errc::MissingKey, where + ": " + key);
    ExpertThreat t;
    t.case_id = item["case_id"].get<std::string>();
    const auto cat = parse_stride(item["threat_type"].get<std::string>());
    if (!cat) throw Error(Errc::InvalidEnum, where + ": threat_type '" + item["threat_type"].get<std::string>() + "'");
    t.threat_type = *cat;
    t.text = item["text"].get<std::string>();
    if (util::trim(t.text).empty()) throw Error(Errc::EmptyText, where + " has empty text");
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<ExpertThreat> load_expert_corpus(const std::string& path) {
  const json doc = json::parse(read_or_io_error(path), nullptr, false);
  if (doc.is_discarded()) throw Error(Errc::IoError, path + " is not valid JSON");
  return expert_corpus_from_json(doc);
}

std::vector<RubricRecord> rubric_from_csv(std::string_view text) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw Error(Errc::MissingKey, "rubric file is empty");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[0].size(); ++i) col[util::to_lower(util::trim(rows[0][i]))] = i;
  std::vector<std::string> names{"case_id"};
  for (int k = 1; k <= 9; ++k) names.push_back("crit" + std::to_string(k));
  names.push_back("threat_count");
  for (const auto& n : names)
    if (!col.count(n)) throw Error(Errc::MissingKey, "rubric column " + n);

  std::vector<RubricRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto cell = [&](const std::string& name) -> const std::string& {
      const std::size_t i = col.at(name);
      if (i >= row.size()) throw Error(Errc::MissingKey, "rubric row " + std::to_string(r) + " lacks " + name);
      return row[i];
    };
    RubricRecord rec;
    rec.case_id = util::trim(cell("case_id"));
    for (int k = 0; k < 9; ++k) {
      const std::string name = "crit" + std::to_string(k + 1);
      const long v = parse_int(cell(name), "row " + std::to_string(r) + " " + name);
      if (v < 1 || v > 5) throw Error(Errc::OutOfRange, "row " + std::to_string(r) + " " + name + " must lie in [1,5]");
      rec.criteria[static_cast<std::size_t>(k)] = static_cast<int>(v);
    }
    const long tc = parse_int(cell("threat_count"), "row " + std::to_string(r) + " threat_count");
    if (tc < 1) throw Error(Errc::OutOfRange, "row " + std::to_string(r) + " threat_count must be >= 1");
    rec.threat_count = static_cast<int>(tc);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<RubricRecord> load_rubric_csv(const std::string& path) {
  return rubric_from_csv(read_or_io_error(path));
}

std::string similarity_csv(const std::vector<SimilarityRecord>& records) {
  std::ostringstream out;
  out << "case_id,batch_index,tool_threat_index,expert_threat_index,category,score\n";
  for (const auto& r : records)
    out << csv_field(r.case_id) << ',' << r.batch_index << ',' << r.tool_threat_index << ','
        << r.expert_threat_index << ',' << csv_field(to_string(r.category)) << ','
        << util::fixed(r.score, 6) << '\n';
  return out.str();
}

std::vector<SimilarityRecord> similarity_from_csv(std::string_view text) {
  const auto rows = parse_csv(text);
  std::vector<SimilarityRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() < 6) throw Error(Errc::MissingKey, "similarity row " + std::to_string(i) + " has too few columns");
    SimilarityRecord r;
    r.case_id = row[0];
    r.batch_index = static_cast<int>(parse_int(row[1], "batch_index"));
    r.tool_threat_index = static_cast<int>(parse_int(row[2], "tool_threat_index"));
    r.expert_threat_index = static_cast<int>(parse_int(row[3], "expert_threat_index"));
    const auto cat = parse_stride(row[4]);
    if (!cat) throw Error(Errc::InvalidEnum, "category '" + row[4] + "'");
    r.category = *cat;
    r.score = parse_double(row[5], "score");
    if (r.score < -1.0 || r.score > 1.0) throw Error(Errc::OutOfRange, "score outside [-1,1]");
    out.push_back(std::move(r));
  }
  return out;
}

json report_json(const SimilarityReport& report) {
  json batches = json::array();
  for (const auto& b : report.batches)
    batches.push_back({{"batch_index", b.batch_index},
                       {"success", b.success},
                       {"best_score", b.best_score ? json(*b.best_score) : json(nullptr)}});
  const auto& v = report.verdict;
  return {{"case_id", v.case_id},
          {"records", report.records.size()},
          {"batches", std::move(batches)},
          {"verdict",
           {{"successes", v.successes},
            {"total_batches", v.total_batches},
            {"sample_p", v.sample_p},
            {"lower_bound_95", v.lower_bound_95},
            {"p_value", v.p_value},
            {"passes", v.passes}}}};
}

json mapping_stats_json(const MappingStats& s) {
  json per = json::object();
  for (auto c : kStrideCategories) {
    const auto& pc = s.per_category[stride_index(c)];
    per[std::string(to_string(c))] = {{"total", pc.total}, {"mapped", pc.mapped}, {"rate", pc.rate}};
  }
  return {{"total", s.total},
          {"mapped", s.mapped},
          {"rate", s.rate},
          {"per_category", std::move(per)},
          {"hallucination_count", s.hallucination_count}};
}

std::vector<CorrelationRow> correlate_threat_level(const std::vector<SimilarityRecord>& records,
                                                   const std::vector<RubricRecord>& rubric) {
  const auto index = rubric_index(rubric);
  std::vector<double> score;
  std::array<std::vector<double>, 9> crit;
  std::vector<double> count;
  for (const auto& r : records) {
    auto it = index.find(r.case_id);
    if (it == index.end()) continue;
    score.push_back(r.score);
    for (std::size_t k = 0; k < 9; ++k) crit[k].push_back(it->second->criteria[k]);
    count.push_back(it->second->threat_count);
  }
  std::vector<CorrelationRow> out{{"Score", safe_pearson(score, score)}};
  for (std::size_t k = 0; k < 9; ++k) out.push_back({std::string(kRubricCriteria[k]), safe_pearson(score, crit[k])});
  out.push_back({"Threat Count", safe_pearson(score, count)});
  return out;
}

std::vector<CorrelationRow> correlate_case_level(const std::vector<SimilarityRecord>& records,
                                                 const std::vector<RubricRecord>& rubric) {
  const auto index = rubric_index(rubric);
  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (const auto& r : records) {
    if (!index.count(r.case_id)) continue;
    auto& s = sums[r.case_id];
    s.first += r.score;
    ++s.second;
  }
  std::vector<double> score, total, count;
  std::array<std::vector<double>, 9> crit;
  for (const auto& [case_id, s] : sums) {
    const RubricRecord& rec = *index.at(case_id);
    score.push_back(s.first / static_cast<double>(s.second));
    double t = 0;
    for (std::size_t k = 0; k < 9; ++k) {
      crit[k].push_back(rec.criteria[k]);
      t += rec.criteria[k];
    }
    total.push_back(t);
    count.push_back(rec.threat_count);
  }
  std::vector<CorrelationRow> out{{"Score", safe_pearson(score, score)},
                                  {"Total Rubric Score", safe_pearson(score, total)}};
  for (std::size_t k = 0; k < 9; ++k) out.push_back({std::string(kRubricCriteria[k]), safe_pearson(score, crit[k])});
  out.push_back({"Threat Count", safe_pearson(score, count)});
  return out;
}

}  // namespace aegis::eval
