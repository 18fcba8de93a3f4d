#include "cdmca/model.hpp"

#include <fstream>
#include <sstream>

#include "cdmca/error.hpp"
#include "cdmca/io.hpp"

namespace cdmca {

namespace {

constexpr const char* kHeader = "cdmca-model v1";

void write_vector(std::ostream& os, const char* key, const Eigen::VectorXd& v) {
  os << key;
  for (Index i = 0; i < v.size(); ++i) os << ' ' << format_double17(v(i));
  os << '\n';
}

class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  // Next non-empty line split on whitespace; the first token must equal key.
  std::vector<std::string> expect(const std::string& key) {
    std::string line;
    while (std::getline(in_, line)) {
      ++lineno_;
      std::istringstream ls(line);
      std::vector<std::string> tokens;
      for (std::string t; ls >> t;) tokens.push_back(t);
      if (tokens.empty()) continue;
      if (tokens.front() != key) fail("expected '" + key + "', found '" + tokens.front() + "'");
      tokens.erase(tokens.begin());
      return tokens;
    }
    fail("unexpected end of file, expected '" + key + "'");
  }

  double number(const std::string& s) { return parse_double(s, where()); }
  Index integer(const std::string& s) { return static_cast<Index>(parse_integer(s, where())); }

  Eigen::VectorXd vector(const std::string& key, Index expected) {
    const auto t = expect(key);
    if (static_cast<Index>(t.size()) != expected) {
      fail("'" + key + "' has " + std::to_string(t.size()) + " values, expected " +
           std::to_string(expected));
    }
    Eigen::VectorXd v(expected);
    for (Index i = 0; i < expected; ++i) v(i) = number(t[static_cast<std::size_t>(i)]);
    return v;
  }

  std::string single(const std::string& key) {
    const auto t = expect(key);
    if (t.size() != 1) fail("'" + key + "' takes exactly one value");
    return t.front();
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::Parse, where() + ": " + msg);
  }

 private:
  std::string where() const { return source_ + " line " + std::to_string(lineno_); }

  std::istream& in_;
  std::string source_;
  long long lineno_ = 0;
};

}  // namespace

Model make_model(std::span<const DomainTable> tables, const Fit& fit, const SolverConfig& cfg) {
  Model m;
  m.layout = fit.pencil.layout;
  for (const auto& t : tables) m.standardization.push_back(t.standardization);
  if (static_cast<Index>(m.standardization.size()) != m.layout.domains()) {
    throw Error(ErrorKind::DimensionMismatch, "one table per domain is required");
  }
  m.k = fit.solution.k();
  m.gamma_m = cfg.gamma_m;
  m.gamma_w = cfg.gamma_w;
  m.regularizer_m = cfg.regularizer_m;
  m.regularizer_w = cfg.regularizer_w;
  m.alpha = fit.pencil.alpha;
  m.zero_threshold = cfg.zero_threshold;
  m.eigenvalues = fit.solution.eigenvalues;
  m.projection = fit.solution.projection;
  return m;
}

void save_model(const std::filesystem::path& path, const Model& model) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  const auto& layout = model.layout;
  os << kHeader << '\n';
  os << "domains " << layout.domains() << '\n';
  os << "features";
  for (auto p : layout.features()) os << ' ' << p;
  os << "\nitems";
  for (auto n : layout.items()) os << ' ' << n;
  os << '\n';
  os << "k " << model.k << '\n';
  os << "gamma_m " << format_double17(model.gamma_m) << '\n';
  os << "gamma_w " << format_double17(model.gamma_w) << '\n';
  os << "regularizer_m " << to_string(model.regularizer_m) << '\n';
  os << "regularizer_w " << to_string(model.regularizer_w) << '\n';
  write_vector(os, "alpha", model.alpha);
  os << "zero_threshold " << format_double17(model.zero_threshold) << '\n';
  write_vector(os, "eigenvalues", model.eigenvalues);
  for (Index d = 0; d < layout.domains(); ++d) {
    const auto& s = model.standardization[static_cast<std::size_t>(d)];
    os << "domain " << d << '\n';
    os << "standardized " << (s ? 1 : 0) << '\n';
    if (s) {
      write_vector(os, "mean", s->mean);
      write_vector(os, "scale", s->scale);
    }
    const Eigen::MatrixXd block = model.projection_block(d);
    for (Index r = 0; r < block.rows(); ++r) write_vector(os, "a", block.row(r).transpose());
  }
  if (!os) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header != kHeader) {
    throw Error(ErrorKind::Parse, path.string() + ": missing '" + std::string(kHeader) + "' header");
  }
  Reader r(in, path.string());
  Model m;
  const Index dcount = r.integer(r.single("domains"));
  if (dcount < 1) r.fail("domain count must be positive");
  std::vector<Index> p, n;
  for (const auto& t : r.expect("features")) p.push_back(r.integer(t));
  for (const auto& t : r.expect("items")) n.push_back(r.integer(t));
  if (static_cast<Index>(p.size()) != dcount || static_cast<Index>(n.size()) != dcount) {
    r.fail("feature/item lists do not match the domain count");
  }
  m.layout = DomainLayout(p, n);
  m.k = r.integer(r.single("k"));
  if (m.k < 1 || m.k > m.layout.total_features()) r.fail("k out of range");
  m.gamma_m = r.number(r.single("gamma_m"));
  m.gamma_w = r.number(r.single("gamma_w"));
  m.regularizer_m = parse_regularizer(r.single("regularizer_m"));
  m.regularizer_w = parse_regularizer(r.single("regularizer_w"));
  m.alpha = r.vector("alpha", dcount);
  m.zero_threshold = r.number(r.single("zero_threshold"));
  m.eigenvalues = r.vector("eigenvalues", m.layout.total_features());
  m.projection.resize(m.layout.total_features(), m.k);
  for (Index d = 0; d < dcount; ++d) {
    if (r.integer(r.single("domain")) != d) r.fail("domain sections out of order");
    const Index flag = r.integer(r.single("standardized"));
    if (flag == 1) {
      Standardization s{r.vector("mean", p[static_cast<std::size_t>(d)]),
                        r.vector("scale", p[static_cast<std::size_t>(d)])};
      m.standardization.emplace_back(std::move(s));
    } else if (flag == 0) {
      m.standardization.emplace_back(std::nullopt);
    } else {
      r.fail("standardized flag must be 0 or 1");
    }
    for (Index row = 0; row < m.layout.features(d); ++row) {
      m.projection.row(m.layout.col_offset(d) + row) = r.vector("a", m.k).transpose();
    }
  }
  return m;
}

}  // namespace cdmca
