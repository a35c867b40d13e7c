#include "psibpmn/coverage.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "json.hpp"
#include "psibpmn/error.hpp"

namespace psibpmn {

std::string_view to_string(ActStatus status) {
  switch (status) {
    case ActStatus::Explicit: return "Explicit";
    case ActStatus::Implicit: return "Implicit";
    case ActStatus::NotImplemented: return "NotImplemented";
  }
  return "?";
}

namespace {

using nlohmann::json;

json parse_array(std::string_view text, const char* what) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SyntaxError, std::string(what) + ": " + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::SyntaxError, std::string(what) + ": expected an array");
  return doc;
}

std::string field(const json& entry, const char* key, const char* what) {
  auto it = entry.find(key);
  if (it == entry.end() || !it->is_string())
    throw Error(ErrorCode::SyntaxError,
                std::string(what) + ": entry lacks string field '" + key + "'");
  return it->get<std::string>();
}

Act act_field(const json& entry, const char* what) {
  auto text = field(entry, "act", what);
  auto act = parse_act(text);
  if (!act) throw Error(ErrorCode::UnknownAnnotationKey, std::string(what) + ": unknown act '" + text + "'");
  return *act;
}

std::string fold(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::size_t row_of(Act act) {
  return static_cast<std::size_t>(std::find(kMatrixRows.begin(), kMatrixRows.end(), act) -
                                  kMatrixRows.begin());
}

}  // namespace

AnnotationSet parse_annotations(std::string_view text) {
  AnnotationSet out;
  for (const auto& entry : parse_array(text, "annotations")) {
    Annotation a;
    a.transaction = field(entry, "transaction", "annotations");
    a.act = act_field(entry, "annotations");
    auto status = field(entry, "status", "annotations");
    if (fold(status) != "implicit")
      throw Error(ErrorCode::SyntaxError, "annotations: status must be \"implicit\", got '" + status + "'");
    if (auto it = entry.find("note"); it != entry.end() && it->is_string()) a.note = it->get<std::string>();
    out.push_back(std::move(a));
  }
  return out;
}

ExplicitMapping parse_mapping(std::string_view text) {
  ExplicitMapping out;
  for (const auto& entry : parse_array(text, "mapping")) {
    ExplicitLink l;
    l.transaction = field(entry, "transaction", "mapping");
    l.act = act_field(entry, "mapping");
    l.node_id = field(entry, "nodeId", "mapping");
    out.push_back(std::move(l));
  }
  return out;
}

const CoverageCell& CoverageMatrix::at(Act act, std::string_view transaction) const {
  auto c = std::find(transactions.begin(), transactions.end(), transaction);
  if (c == transactions.end())
    throw Error(ErrorCode::UnknownAnnotationKey, "no column " + std::string(transaction));
  return cells[row_of(act)][static_cast<std::size_t>(c - transactions.begin())];
}

namespace {

void count(Tally& t, ActStatus s) {
  switch (s) {
    case ActStatus::Explicit: ++t.explicit_; break;
    case ActStatus::Implicit: ++t.implicit; break;
    case ActStatus::NotImplemented: ++t.not_implemented; break;
  }
}

}  // namespace

Tally CoverageMatrix::row(std::size_t r) const {
  Tally t;
  for (const auto& cell : cells[r]) count(t, cell.status);
  return t;
}

Tally CoverageMatrix::column(std::size_t c) const {
  Tally t;
  for (const auto& row : cells) count(t, row[c].status);
  return t;
}

Tally CoverageMatrix::total() const {
  Tally t;
  for (const auto& row : cells)
    for (const auto& cell : row) count(t, cell.status);
  return t;
}

CoverageMatrix classify_acts(const TransactionNetwork& net, const BpmnModel& model,
                             const ClassifyOptions& options, const AnnotationSet& annotations) {
  CoverageMatrix m;
  for (const auto& t : net.transactions) m.transactions.push_back(t.id);
  m.cells.assign(kMatrixRows.size(), std::vector<CoverageCell>(m.transactions.size()));
  auto column = [&](const std::string& tx, const char* what) {
    auto it = std::find(m.transactions.begin(), m.transactions.end(), tx);
    if (it == m.transactions.end())
      throw Error(ErrorCode::UnknownAnnotationKey,
                  std::string(what) + " names unknown transaction '" + tx + "'");
    return static_cast<std::size_t>(it - m.transactions.begin());
  };
  auto mark_explicit = [&](std::size_t r, std::size_t c, std::string evidence) {
    auto& cell = m.cells[r][c];
    cell.status = ActStatus::Explicit;
    cell.evidence.push_back(std::move(evidence));
  };

  if (options.mapping) {
    for (const auto& link : *options.mapping) {
      auto c = column(link.transaction, "mapping");
      if (!model.find_node(link.node_id)) {
        m.warnings.push_back("mapping: node '" + link.node_id + "' for " + link.transaction + " " +
                             std::string(to_string(link.act)) + " is not in the model");
        continue;
      }
      mark_explicit(row_of(link.act), c, "node " + link.node_id + " (mapping)");
    }
  }
  if (options.heuristic_names) {
    for (std::size_t c = 0; c < m.transactions.size(); ++c) {
      const auto& tk = net.transactions[c];
      for (std::size_t r = 0; r < kMatrixRows.size(); ++r) {
        const Act act = kMatrixRows[r];
        const auto label = fold(std::string(act_label(act)) + " " + tk.name);
        for (const auto& pool : model.pools)
          for (const auto& n : pool.nodes) {
            if (fold(n.name) == label) mark_explicit(r, c, "node " + n.id + " (name)");
            else if (n.meta && n.meta->act == act && fold(n.meta->transaction) == fold(tk.id))
              mark_explicit(r, c, "node " + n.id + " (tag)");
          }
      }
    }
  }
  for (const auto& a : annotations) {
    auto c = column(a.transaction, "annotation");
    auto& cell = m.cells[row_of(a.act)][c];
    if (cell.status == ActStatus::Explicit) {
      m.warnings.push_back("annotation for " + a.transaction + " " + std::string(act_label(a.act)) +
                           " ignored: the act is explicit");
      continue;
    }
    cell.status = ActStatus::Implicit;
    cell.evidence.push_back("annotation" + (a.note.empty() ? std::string() : ": " + a.note));
  }
  return m;
}

std::string percent(int count, int total, bool decimal_comma) {
  long long tenths = total == 0 ? 0 : (2000LL * count + total) / (2LL * total);
  std::string out = std::to_string(tenths / 10) + (decimal_comma ? "," : ".") +
                    std::to_string(tenths % 10) + "%";
  return out;
}

namespace {

std::string triplet(const Tally& t) {
  return "(" + std::to_string(t.explicit_) + "/" + std::to_string(t.implicit) + "/" +
         std::to_string(t.not_implemented) + ")";
}

char initial(ActStatus s) {
  switch (s) {
    case ActStatus::Explicit: return 'E';
    case ActStatus::Implicit: return 'I';
    default: return 'N';
  }
}

std::vector<std::string> footer(const CoverageMatrix& m, bool comma) {
  auto t = m.total();
  auto n = std::to_string(t.total());
  return {
      "Total Implemented = " + std::to_string(t.implemented()) + " (in " + n + ") = " +
          percent(t.implemented(), t.total(), comma),
      "Total Explicit = " + std::to_string(t.explicit_) + " (in " + n + ") = " +
          percent(t.explicit_, t.total(), comma),
      "Total Implicit = " + std::to_string(t.implicit) + " (in " + n + ") = " +
          percent(t.implicit, t.total(), comma),
  };
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

std::string render_matrix(const CoverageMatrix& m, ReportFormat format, bool decimal_comma) {
  std::ostringstream os;
  if (format == ReportFormat::Csv) {
    os << "act";
    for (const auto& t : m.transactions) os << "," << csv_field(t);
    os << ",sum\n";
    for (std::size_t r = 0; r < kMatrixRows.size(); ++r) {
      os << act_label(kMatrixRows[r]);
      for (const auto& cell : m.cells[r]) os << "," << initial(cell.status);
      os << "," << triplet(m.row(r)) << "\n";
    }
    os << "sum";
    for (std::size_t c = 0; c < m.transactions.size(); ++c) os << "," << triplet(m.column(c));
    os << ",\n";
    for (const auto& line : footer(m, decimal_comma)) os << csv_field(line) << "\n";
    return os.str();
  }

  std::size_t label_w = 3;
  for (Act a : kMatrixRows) label_w = std::max(label_w, act_label(a).size());
  std::vector<std::size_t> widths;
  for (std::size_t c = 0; c < m.transactions.size(); ++c)
    widths.push_back(std::max(m.transactions[c].size(), triplet(m.column(c)).size()));
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  os << pad("", label_w);
  for (std::size_t c = 0; c < widths.size(); ++c) os << " | " << pad(m.transactions[c], widths[c]);
  os << " | Sum (E/I/N)\n";
  for (std::size_t r = 0; r < kMatrixRows.size(); ++r) {
    os << pad(std::string(act_label(kMatrixRows[r])), label_w);
    for (std::size_t c = 0; c < widths.size(); ++c)
      os << " | " << pad(std::string(1, initial(m.cells[r][c].status)), widths[c]);
    os << " | " << triplet(m.row(r)) << "\n";
  }
  os << pad("Sum", label_w);
  for (std::size_t c = 0; c < widths.size(); ++c) os << " | " << pad(triplet(m.column(c)), widths[c]);
  os << " |\n";
  for (const auto& line : footer(m, decimal_comma)) os << line << "\n";
  return os.str();
}

}  // namespace psibpmn
