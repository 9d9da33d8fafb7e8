#include "fbrs/qp_file.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace fbrs {

namespace {

struct Line {
  int number;
  std::vector<std::string_view> tokens;
};

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  int number = 0;
  while (!text.empty()) {
    ++number;
    const auto eol = text.find('\n');
    std::string_view raw = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);

    if (const auto hash = raw.find('#'); hash != std::string_view::npos) {
      raw = raw.substr(0, hash);
    }
    Line line{number, {}};
    std::size_t pos = 0;
    while (pos < raw.size()) {
      pos = raw.find_first_not_of(" \t\r\f\v", pos);
      if (pos == std::string_view::npos) break;
      const auto end = raw.find_first_of(" \t\r\f\v", pos);
      line.tokens.push_back(raw.substr(pos, end - pos));
      pos = end;
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

double parse_double(std::string_view token, int line) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError(line, "invalid number '" + std::string(token) + "'");
  }
  return value;
}

long parse_positive_int(std::string_view token, int line) {
  long value = 0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() || value <= 0) {
    throw ParseError(line, "expected a positive integer, got '" +
                               std::string(token) + "'");
  }
  return value;
}

class Reader {
 public:
  explicit Reader(std::vector<Line> lines) : lines_(std::move(lines)) {}

  bool done() const { return pos_ >= lines_.size(); }

  int last_line() const {
    return lines_.empty() ? 1 : lines_.back().number;
  }

  const Line& next(std::string_view expecting) {
    if (done()) {
      throw DimensionMismatch(last_line(), "unexpected end of input, expected " +
                                               std::string(expecting));
    }
    return lines_[pos_++];
  }

  const Line* peek() const { return done() ? nullptr : &lines_[pos_]; }

  void keyword(std::string_view word) {
    const auto& line = next("'" + std::string(word) + "'");
    if (line.tokens.size() != 1 || line.tokens[0] != word) {
      throw ParseError(line.number, "expected '" + std::string(word) + "'");
    }
  }

  long dimension(std::string_view name) {
    const auto& line = next("'" + std::string(name) + " <int>'");
    if (line.tokens.size() != 2 || line.tokens[0] != name) {
      throw ParseError(line.number, "expected '" + std::string(name) + " <int>'");
    }
    return parse_positive_int(line.tokens[1], line.number);
  }

  Eigen::VectorXd row(Eigen::Index size, std::string_view what) {
    const auto& line = next(std::string(what));
    if (static_cast<Eigen::Index>(line.tokens.size()) != size) {
      throw DimensionMismatch(
          line.number, std::string(what) + ": expected " +
                           std::to_string(size) + " entries, found " +
                           std::to_string(line.tokens.size()));
    }
    Eigen::VectorXd out(size);
    for (Eigen::Index i = 0; i < size; ++i) {
      out(i) = parse_double(line.tokens[static_cast<std::size_t>(i)], line.number);
    }
    return out;
  }

  Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols,
                         std::string_view what) {
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      out.row(r) = row(cols, std::string(what) + " row " + std::to_string(r + 1))
                       .transpose();
    }
    return out;
  }

 private:
  std::vector<Line> lines_;
  std::size_t pos_ = 0;
};

void append_double(std::string& out, double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, ptr);
}

template <typename Derived>
void append_row(std::string& out, const Eigen::DenseBase<Derived>& row) {
  for (Eigen::Index i = 0; i < row.size(); ++i) {
    if (i > 0) out += ' ';
    append_double(out, row(i));
  }
  out += '\n';
}

}  // namespace

QpFile parse_qp(std::string_view text) {
  Reader in(tokenize(text));
  {
    const auto& header = in.next("'FBQP 1'");
    if (header.tokens.size() != 2 || header.tokens[0] != "FBQP") {
      throw ParseError(header.number, "missing 'FBQP 1' header");
    }
    if (header.tokens[1] != "1") {
      throw ParseError(header.number, "unsupported FBQP version '" +
                                          std::string(header.tokens[1]) + "'");
    }
  }
  const auto n = static_cast<Eigen::Index>(in.dimension("n"));
  const auto q = static_cast<Eigen::Index>(in.dimension("q"));

  in.keyword("H");
  Eigen::MatrixXd H = in.matrix(n, n, "H");
  in.keyword("f");
  Eigen::VectorXd f = in.row(n, "f");
  in.keyword("A");
  Eigen::MatrixXd A = in.matrix(q, n, "A");
  in.keyword("b");
  Eigen::VectorXd b = in.row(q, "b");

  std::optional<PrimalDualPoint<double>> x0;
  if (!in.done()) {
    in.keyword("x0");
    x0 = PrimalDualPoint<double>::FromStacked(in.row(n + q, "x0"), n);
  }
  if (const auto* extra = in.peek()) {
    throw ParseError(extra->number, "unexpected trailing content");
  }

  QpFile file{QpProblem<double>(std::move(H), std::move(f), std::move(A),
                                std::move(b)),
              std::move(x0)};
  if (file.x0 && (!file.x0->z.allFinite() || !file.x0->v.allFinite())) {
    throw InvalidProblem("x0 contains non-finite entries");
  }
  return file;
}

QpFile read_qp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_qp(buf.str());
}

std::string serialize_qp(const QpProblem<double>& problem,
                         const std::optional<PrimalDualPoint<double>>& x0) {
  std::string out = "FBQP 1\n";
  out += "n " + std::to_string(problem.n()) + "\n";
  out += "q " + std::to_string(problem.q()) + "\n";
  out += "H\n";
  for (Eigen::Index r = 0; r < problem.n(); ++r) append_row(out, problem.H().row(r));
  out += "f\n";
  append_row(out, problem.f());
  out += "A\n";
  for (Eigen::Index r = 0; r < problem.q(); ++r) append_row(out, problem.A().row(r));
  out += "b\n";
  append_row(out, problem.b());
  if (x0) {
    out += "x0\n";
    append_row(out, x0->stacked());
  }
  return out;
}

void write_trace_csv(std::ostream& out,
                     const std::vector<IterationRecord<double>>& trace) {
  out << kTraceCsvHeader << '\n';
  char buf[512];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                  r.k, r.norm_Feps, r.norm_F0, r.norm_Fnr, r.t, r.delta, r.eps,
                  r.backtracks);
    out << buf;
  }
}

}  // namespace fbrs
