#include <algorithm>
#include <array>
#include <cstdio>
#include <numeric>
#include <regex>

#include "aegis/error.hpp"
#include "aegis/report/report.hpp"
#include "aegis/util.hpp"

namespace aegis::report {

namespace {

// Advance widths (1/1000 em) for codes 32..126 from the standard font metrics.
constexpr std::array<int, 95> kHelvetica = {
    278, 278, 355, 556, 556, 889, 667, 191, 333, 333, 389, 584, 278, 333, 278, 278,
    556, 556, 556, 556, 556, 556, 556, 556, 556, 556, 278, 278, 584, 584, 584, 556,
    1015, 667, 667, 722, 722, 667, 611, 778, 722, 278, 500, 667, 556, 833, 722, 778,
    667, 778, 722, 667, 611, 722, 667, 944, 667, 667, 611, 278, 278, 278, 469, 556,
    333, 556, 556, 500, 556, 556, 278, 556, 556, 222, 222, 500, 222, 833, 556, 556,
    556, 556, 333, 500, 278, 556, 500, 722, 500, 500, 500, 334, 260, 334, 584};
constexpr std::array<int, 95> kHelveticaBold = {
    278, 333, 474, 556, 556, 889, 722, 238, 333, 333, 389, 584, 278, 333, 278, 278,
    556, 556, 556, 556, 556, 556, 556, 556, 556, 556, 333, 333, 584, 584, 584, 611,
    975, 722, 722, 722, 722, 667, 611, 778, 722, 278, 556, 722, 611, 833, 722, 778,
    667, 778, 722, 667, 611, 722, 667, 944, 667, 667, 611, 333, 278, 333, 584, 556,
    333, 556, 611, 556, 611, 556, 333, 611, 611, 278, 278, 556, 278, 889, 611, 611,
    611, 611, 389, 556, 333, 611, 556, 778, 556, 556, 500, 389, 280, 389, 584};

enum class Font { Regular, Bold, Mono };

constexpr double kPageW = 612, kPageH = 792, kMargin = 54;
constexpr double kTextW = kPageW - 2 * kMargin;
constexpr double kCellPad = 3;

// UTF-8 to single-byte WinAnsi; unmappable code points become '?'.
std::string to_winansi(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size();) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    unsigned cp = 0;
    int len = 1;
    if (c < 0x80) cp = c;
    else if ((c >> 5) == 0x6) { cp = c & 0x1F; len = 2; }
    else if ((c >> 4) == 0xE) { cp = c & 0x0F; len = 3; }
    else if ((c >> 3) == 0x1E) { cp = c & 0x07; len = 4; }
    else { out.push_back('?'); ++i; continue; }
    if (i + len > s.size()) { out.push_back('?'); break; }
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const unsigned char cc = static_cast<unsigned char>(s[i + k]);
      if ((cc >> 6) != 0x2) ok = false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    i += ok ? len : 1;
    if (!ok) { out.push_back('?'); continue; }
    switch (cp) {
      case 0x2018: out.push_back('\x91'); break;
      case 0x2019: out.push_back('\x92'); break;
      case 0x201C: out.push_back('\x93'); break;
      case 0x201D: out.push_back('\x94'); break;
      case 0x2022: out.push_back('\x95'); break;
      case 0x2013: out.push_back('\x96'); break;
      case 0x2014: out.push_back('\x97'); break;
      case 0x2026: out.push_back('\x85'); break;
      case 0x20AC: out.push_back('\x80'); break;
      case 0x2122: out.push_back('\x99'); break;
      case '\t': out += "    "; break;
      default:
        if (cp < 0x20) break;
        out.push_back(cp < 0x100 ? static_cast<char>(cp) : '?');
    }
  }
  return out;
}

double text_width(std::string_view s, Font f, double size) {
  if (f == Font::Mono) return static_cast<double>(s.size()) * 600 * size / 1000;
  const auto& table = f == Font::Bold ? kHelveticaBold : kHelvetica;
  double w = 0;
  for (unsigned char c : s) w += (c >= 32 && c <= 126) ? table[c - 32] : 556;
  return w * size / 1000;
}

// Greedy word wrap; words wider than the line are split by characters.
std::vector<std::string> wrap(const std::string& text, Font f, double size, double width) {
  std::vector<std::string> lines;
  std::string cur;
  auto flush = [&] {
    lines.push_back(cur);
    cur.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t j = text.find(' ', i);
    if (j == std::string::npos) j = text.size();
    std::string word = text.substr(i, j - i);
    i = j + 1;
    if (word.empty()) continue;
    const std::string candidate = cur.empty() ? word : cur + " " + word;
    if (text_width(candidate, f, size) <= width) {
      cur = candidate;
      continue;
    }
    if (!cur.empty()) flush();
    while (text_width(word, f, size) > width && word.size() > 1) {
      std::size_t k = 1;
      while (k < word.size() && text_width(word.substr(0, k + 1), f, size) <= width) ++k;
      lines.push_back(word.substr(0, k));
      word.erase(0, k);
    }
    cur = word;
  }
  if (!cur.empty() || lines.empty()) flush();
  return lines;
}

std::string clean_inline(std::string s) {
  static const std::regex link(R"(\[([^\]]*)\]\(([^)]*)\))");
  static const std::regex autolink(R"(<((?:https?|mailto):[^>\s]+)>)");
  s = std::regex_replace(s, link, "$1");
  s = std::regex_replace(s, autolink, "$1");
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.compare(i, 2, "**") == 0) { ++i; continue; }
    if (s[i] == '`') continue;
    if (s[i] == '\\' && i + 1 < s.size() && s[i + 1] == '|') { out.push_back('|'); ++i; continue; }
    out.push_back(s[i]);
  }
  return to_winansi(out);
}

std::string pdf_string(std::string_view s) {
  std::string out = "(";
  for (unsigned char c : s) {
    if (c == '(' || c == ')' || c == '\\') {
      out.push_back('\\');
      out.push_back(static_cast<char>(c));
    } else if (c < 32 || c > 126) {
      char buf[6];
      std::snprintf(buf, sizeof buf, "\\%03o", c);
      out += buf;
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
  out.push_back(')');
  return out;
}

std::vector<std::string> split_row(std::string_view line) {
  std::string_view r = line;
  if (!r.empty() && r.front() == '|') r.remove_prefix(1);
  if (!r.empty() && r.back() == '|' && (r.size() < 2 || r[r.size() - 2] != '\\')) r.remove_suffix(1);
  std::vector<std::string> cells;
  std::string cur;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] == '\\' && i + 1 < r.size() && r[i + 1] == '|') {
      cur += "\\|";
      ++i;
    } else if (r[i] == '|') {
      cells.push_back(util::trim(cur));
      cur.clear();
    } else {
      cur.push_back(r[i]);
    }
  }
  cells.push_back(util::trim(cur));
  return cells;
}

bool separator_row(const std::vector<std::string>& cells) {
  static const std::regex re(R"(:?-+:?)");
  return std::all_of(cells.begin(), cells.end(), [](const std::string& c) { return std::regex_match(c, re); });
}

class Layout {
 public:
  Layout() { new_page(); }

  void heading(const std::string& text, int level) {
    const double size = level == 1 ? 18 : level == 2 ? 14 : 12;
    gap(level == 1 ? 4 : 10);
    paragraph(text, Font::Bold, size, 0);
    gap(4);
  }

  void paragraph(const std::string& text, Font f, double size, double indent) {
    const double lead = size * 1.3;
    for (const auto& line : wrap(text, f, size, kTextW - indent)) {
      ensure(lead);
      y_ -= lead;
      show(kMargin + indent, y_ + size * 0.25, f, size, line);
    }
  }

  void code(const std::vector<std::string>& lines) {
    const double size = 8, lead = size * 1.25;
    gap(2);
    for (const auto& raw : lines) {
      for (const auto& line : wrap_mono(to_winansi(raw), size)) {
        ensure(lead);
        y_ -= lead;
        show(kMargin + 8, y_ + 2, Font::Mono, size, line);
      }
    }
    gap(6);
  }

  void rule() {
    ensure(8);
    y_ -= 4;
    stroke_line(kMargin, y_, kMargin + kTextW, y_);
    y_ -= 4;
  }

  void gap(double h) { y_ = std::max(y_ - h, kMargin); }

  void table(const std::vector<std::vector<std::string>>& rows, bool has_header) {
    std::size_t ncols = 0;
    for (const auto& r : rows) ncols = std::max(ncols, r.size());
    if (ncols == 0) return;
    const double size = 8, lead = size * 1.25;

    std::vector<double> natural(ncols, 0);
    for (const auto& r : rows)
      for (std::size_t c = 0; c < r.size(); ++c)
        natural[c] = std::max(natural[c], text_width(r[c], Font::Regular, size) + 2 * kCellPad);
    const double min_w = std::min(40.0, kTextW / static_cast<double>(ncols));
    std::vector<double> widths(ncols);
    const double total = std::accumulate(natural.begin(), natural.end(), 0.0);
    for (std::size_t c = 0; c < ncols; ++c)
      widths[c] = total > 0 ? std::max(min_w, kTextW * natural[c] / total) : kTextW / ncols;
    const double scale = kTextW / std::accumulate(widths.begin(), widths.end(), 0.0);
    for (auto& w : widths) w *= scale;

    gap(4);
    for (std::size_t ri = 0; ri < rows.size(); ++ri) {
      const Font f = has_header && ri == 0 ? Font::Bold : Font::Regular;
      std::vector<std::vector<std::string>> cell_lines(ncols);
      std::size_t height = 1;
      for (std::size_t c = 0; c < ncols; ++c) {
        const std::string text = c < rows[ri].size() ? rows[ri][c] : "";
        cell_lines[c] = wrap(text, f, size, widths[c] - 2 * kCellPad);
        height = std::max(height, cell_lines[c].size());
      }
      const double row_h = static_cast<double>(height) * lead + 2 * kCellPad;
      // move whole rows to a fresh page when they fit there
      if (y_ - row_h < kMargin && row_h <= kPageH - 2 * kMargin) new_page();

      std::size_t done = 0;
      while (done < height) {
        const std::size_t room = static_cast<std::size_t>(std::max(0.0, (y_ - kMargin - 2 * kCellPad) / lead));
        if (room == 0) {
          new_page();
          continue;
        }
        const std::size_t take = std::min(room, height - done);
        const double top = y_;
        double x = kMargin;
        for (std::size_t c = 0; c < ncols; ++c) {
          for (std::size_t l = done; l < std::min(done + take, cell_lines[c].size()); ++l) {
            const double ly = top - kCellPad - static_cast<double>(l - done + 1) * lead;
            show(x + kCellPad, ly + size * 0.25, f, size, cell_lines[c][l]);
          }
          x += widths[c];
        }
        y_ = top - static_cast<double>(take) * lead - 2 * kCellPad;
        stroke_line(kMargin, y_, kMargin + kTextW, y_);
        done += take;
        if (done < height) new_page();
      }
    }
    gap(6);
  }

  std::vector<std::string>& pages() { return pages_; }

 private:
  std::vector<std::string> wrap_mono(const std::string& line, double size) {
    const std::size_t max_chars =
        std::max<std::size_t>(1, static_cast<std::size_t>((kTextW - 8) / (0.6 * size)));
    if (line.size() <= max_chars) return {line};
    std::vector<std::string> out;
    for (std::size_t i = 0; i < line.size(); i += max_chars) out.push_back(line.substr(i, max_chars));
    return out;
  }

  void ensure(double h) {
    if (y_ - h < kMargin) new_page();
  }

  void new_page() {
    pages_.emplace_back();
    y_ = kPageH - kMargin;
  }

  void show(double x, double y, Font f, double size, const std::string& text) {
    if (text.empty()) return;
    const char* name = f == Font::Regular ? "F1" : f == Font::Bold ? "F2" : "F3";
    char buf[96];
    std::snprintf(buf, sizeof buf, "BT /%s %.1f Tf %.2f %.2f Td ", name, size, x, y);
    pages_.back() += buf;
    pages_.back() += pdf_string(text);
    pages_.back() += " Tj ET\n";
  }

  void stroke_line(double x1, double y1, double x2, double y2) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "0.5 w %.2f %.2f m %.2f %.2f l S\n", x1, y1, x2, y2);
    pages_.back() += buf;
  }

  std::vector<std::string> pages_;
  double y_ = 0;
};

void lay_out(Layout& out, std::string_view markdown) {
  const auto lines = util::split_lines(markdown);
  std::string para;
  auto flush_para = [&] {
    if (!para.empty()) {
      out.paragraph(clean_inline(para), Font::Regular, 10, 0);
      out.gap(5);
      para.clear();
    }
  };

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string line = util::trim(lines[i]);
    if (line.rfind("```", 0) == 0) {
      flush_para();
      std::vector<std::string> body;
      for (++i; i < lines.size() && util::trim(lines[i]).rfind("```", 0) != 0; ++i) body.push_back(lines[i]);
      out.code(body);
      continue;
    }
    if (line.empty()) {
      flush_para();
      continue;
    }
    if (line.front() == '#') {
      flush_para();
      const std::size_t level = line.find_first_not_of('#');
      out.heading(clean_inline(util::trim(std::string_view(line).substr(std::min(level, line.size())))),
                  static_cast<int>(std::min<std::size_t>(level, 3)));
      continue;
    }
    if (line.front() == '|') {
      flush_para();
      std::vector<std::vector<std::string>> rows;
      bool has_header = false;
      for (; i < lines.size(); ++i) {
        const std::string row = util::trim(lines[i]);
        if (row.empty() || row.front() != '|') break;
        auto cells = split_row(row);
        if (separator_row(cells)) {
          if (rows.size() == 1) has_header = true;
          continue;
        }
        for (auto& c : cells) c = clean_inline(c);
        rows.push_back(std::move(cells));
      }
      --i;
      out.table(rows, has_header);
      continue;
    }
    if (line == "---" || line == "***") {
      flush_para();
      out.rule();
      continue;
    }
    if (line.rfind("- ", 0) == 0 || line.rfind("* ", 0) == 0) {
      flush_para();
      out.paragraph("\x95 " + clean_inline(line.substr(2)), Font::Regular, 10, 10);
      out.gap(2);
      continue;
    }
    para += para.empty() ? line : " " + line;
  }
  flush_para();
}

std::string assemble(const std::vector<std::string>& pages) {
  std::vector<std::string> objects;
  const std::size_t n = pages.size();
  std::string kids;
  for (std::size_t p = 0; p < n; ++p) kids += std::to_string(7 + 2 * p) + " 0 R ";
  objects.push_back("<< /Type /Catalog /Pages 2 0 R >>");
  objects.push_back("<< /Type /Pages /Kids [" + kids + "] /Count " + std::to_string(n) + " >>");
  for (const char* base : {"Helvetica", "Helvetica-Bold", "Courier"})
    objects.push_back(std::string("<< /Type /Font /Subtype /Type1 /BaseFont /") + base +
                      " /Encoding /WinAnsiEncoding >>");
  objects.push_back("<< /Title " + pdf_string(kReportTitle) + " /Producer (aegis) >>");
  for (std::size_t p = 0; p < n; ++p) {
    objects.push_back("<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] /Resources << /Font << "
                      "/F1 3 0 R /F2 4 0 R /F3 5 0 R >> >> /Contents " +
                      std::to_string(8 + 2 * p) + " 0 R >>");
    objects.push_back("<< /Length " + std::to_string(pages[p].size()) + " >>\nstream\n" + pages[p] +
                      "endstream");
  }

  std::string pdf = "%PDF-1.4\n%\xE2\xE3\xCF\xD3\n";
  std::vector<std::size_t> offsets;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    offsets.push_back(pdf.size());
    pdf += std::to_string(i + 1) + " 0 obj\n" + objects[i] + "\nendobj\n";
  }
  const std::size_t xref = pdf.size();
  pdf += "xref\n0 " + std::to_string(objects.size() + 1) + "\n0000000000 65535 f \n";
  for (std::size_t off : offsets) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%010zu 00000 n \n", off);
    pdf += buf;
  }
  pdf += "trailer\n<< /Size " + std::to_string(objects.size() + 1) +
         " /Root 1 0 R /Info 6 0 R >>\nstartxref\n" + std::to_string(xref) + "\n%%EOF\n";
  return pdf;
}

}  // namespace

std::string render_pdf(std::string_view markdown) {
  try {
    Layout layout;
    lay_out(layout, markdown);
    return assemble(layout.pages());
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::RenderFailed, e.what());
  }
}

}  // namespace aegis::report
