#include "spinlet/io.hpp"

#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

namespace spinlet {

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view tok, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  require(res.ec == std::errc() && res.ptr == tok.data() + tok.size(), errc::format_error,
          "malformed number '" + std::string(tok) + "' in " + where);
  return v;
}

long long parse_int(std::string_view tok, const std::string& where) {
  long long v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  require(res.ec == std::errc() && res.ptr == tok.data() + tok.size(), errc::format_error,
          "malformed integer '" + std::string(tok) + "' in " + where);
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), errc::format_error, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Strip one trailing carriage return (files written on other platforms).
std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

} // namespace

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), errc::format_error, "cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    require(out.good(), errc::format_error, "write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  require(!ec, errc::format_error, "cannot move temp file over '" + path + "': " + ec.message());
}

std::string file_digest(const std::string& path) {
  const std::string bytes = read_file(path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

PowerSpectra read_spectra_csv(const std::string& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), errc::format_error, "'" + path + "' is empty");
  require(chomp(line) == "l,C_T,C_E,C_M,C_TE,C_TM", errc::format_error,
          "'" + path + "' lacks the spectra header l,C_T,C_E,C_M,C_TE,C_TM");
  PowerSpectra s;
  int expected_l = 0;
  while (std::getline(in, line)) {
    const std::string_view body = chomp(line);
    if (body.empty()) continue;
    const auto f = split_csv(body);
    require(f.size() == 6, errc::format_error,
            "spectra row " + std::to_string(expected_l) + " has " + std::to_string(f.size()) +
                " fields, expected 6");
    const long long l = parse_int(f[0], path);
    require(l == expected_l, errc::format_error,
            "spectra rows must list l = 0,1,2,... contiguously; got l=" + std::to_string(l) +
                " where " + std::to_string(expected_l) + " was expected");
    s.c_t.push_back(parse_double(f[1], path));
    s.c_e.push_back(parse_double(f[2], path));
    s.c_m.push_back(parse_double(f[3], path));
    s.c_te.push_back(parse_double(f[4], path));
    s.c_tm.push_back(parse_double(f[5], path));
    ++expected_l;
  }
  s.validate();
  return s;
}

void write_spectra_csv(const PowerSpectra& spectra, const std::string& path) {
  spectra.validate();
  std::string out = "l,C_T,C_E,C_M,C_TE,C_TM\n";
  for (int l = 0; l <= spectra.lmax(); ++l) {
    out += std::to_string(l);
    out += ',';
    out += format_double(spectra.c_t[l]);
    out += ',';
    out += format_double(spectra.c_e[l]);
    out += ',';
    out += format_double(spectra.c_m[l]);
    out += ',';
    out += format_double(spectra.c_te[l]);
    out += ',';
    out += format_double(spectra.c_tm[l]);
    out += '\n';
  }
  atomic_write(path, out);
}

namespace {

constexpr char kAlmMagic[8] = {'N', 'D', 'L', 'A', 'L', 'M', '1', '\0'};

template <class T> void append_raw(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T> T take_raw(const std::string& bytes, std::size_t& pos, const std::string& path) {
  require(pos + sizeof(T) <= bytes.size(), errc::format_error, "'" + path + "' is truncated");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

} // namespace

AlmSet read_alm(const std::string& path) {
  const std::string bytes = read_file(path);
  require(bytes.size() >= 16 && std::memcmp(bytes.data(), kAlmMagic, 8) == 0, errc::format_error,
          "'" + path + "' is not a coefficient table (bad magic)");
  std::size_t pos = 8;
  const auto spin = take_raw<std::int32_t>(bytes, pos, path);
  const auto lmax_u = take_raw<std::uint32_t>(bytes, pos, path);
  require(lmax_u <= (1u << 20), errc::format_error, "'" + path + "' declares an implausible lmax");
  const int lmax = static_cast<int>(lmax_u);
  require(lmax >= std::abs(spin), errc::format_error,
          "'" + path + "' declares lmax below |spin|");
  AlmSet alm(spin, lmax);
  require(bytes.size() == pos + 16 * alm.size(), errc::format_error,
          "'" + path + "' payload does not match the declared table size");
  for (int l = alm.lmin(); l <= lmax; ++l) {
    for (int m = -l; m <= l; ++m) {
      const double re = take_raw<double>(bytes, pos, path);
      const double im = take_raw<double>(bytes, pos, path);
      alm.at(l, m) = std::complex<double>(re, im);
    }
  }
  return alm;
}

void write_alm(const AlmSet& alm, const std::string& path) {
  std::string out;
  out.reserve(16 + 16 * alm.size());
  out.append(kAlmMagic, 8);
  append_raw<std::int32_t>(out, alm.spin());
  append_raw<std::uint32_t>(out, static_cast<std::uint32_t>(alm.lmax()));
  for (int l = alm.lmin(); l <= alm.lmax(); ++l) {
    for (int m = -l; m <= l; ++m) {
      append_raw<double>(out, alm.at(l, m).real());
      append_raw<double>(out, alm.at(l, m).imag());
    }
  }
  atomic_write(path, out);
}

NeedletCoeffs read_coeffs(const std::string& path, CoeffArchiveInfo* info) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;

  const auto next_json = [&](const char* what) {
    while (std::getline(in, line)) {
      const std::string_view body = chomp(line);
      if (body.empty()) continue;
      try {
        return nlohmann::json::parse(body);
      } catch (const nlohmann::json::exception& e) {
        fail(errc::format_error, "'" + path + "': bad " + std::string(what) + ": " + e.what());
      }
    }
    fail(errc::format_error, "'" + path + "': unexpected end of file, expected " + std::string(what));
  };

  nlohmann::json head = next_json("archive header");
  try {
    require(head.at("format").get<std::string>() == "ndlcoef1", errc::format_error,
            "'" + path + "' is not a needlet coefficient archive");
    NeedletCoeffs c;
    const std::string kind = head.at("kind").get<std::string>();
    require(kind == "spin" || kind == "mixed", errc::format_error,
            "'" + path + "': unknown coefficient kind '" + kind + "'");
    c.kind = kind == "spin" ? needlet_kind::spin : needlet_kind::mixed;
    c.spin = head.at("spin").get<int>();
    c.j_min = head.at("j_min").get<int>();
    const int j_max = head.at("j_max").get<int>();
    require(j_max >= c.j_min, errc::format_error, "'" + path + "': j_max below j_min");
    CoeffArchiveInfo ai;
    ai.B = head.at("B").get<double>();
    ai.bank_spin = head.at("bank_spin").get<int>();
    ai.j_min = c.j_min;
    ai.j_max = j_max;

    for (int j = c.j_min; j <= j_max; ++j) {
      nlohmann::json lev = next_json("level header");
      require(lev.at("j").get<int>() == j, errc::format_error,
              "'" + path + "': levels out of order at scale " + std::to_string(j));
      const auto n = lev.at("n").get<std::size_t>();
      std::vector<std::complex<double>> beta(n);
      for (std::size_t k = 0; k < n; ++k) {
        nlohmann::json row = next_json("coefficient row");
        require(row.is_array() && row.size() == 6, errc::format_error,
                "'" + path + "': coefficient rows are [k, theta, phi, lambda, re, im]");
        require(row.at(0).get<std::size_t>() == k, errc::format_error,
                "'" + path + "': coefficient rows out of order at scale " + std::to_string(j));
        beta[k] = std::complex<double>(row.at(4).get<double>(), row.at(5).get<double>());
      }
      c.beta.push_back(std::move(beta));
    }
    if (info) *info = ai;
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::format_error, "'" + path + "': " + e.what());
  }
}

void write_coeffs(const NeedletCoeffs& coeffs, const NeedletBank& bank, const std::string& path) {
  require(coeffs.j_min == bank.j_min() && coeffs.j_max() == bank.j_max(), errc::invalid_input,
          "coefficient scales do not match the bank");
  nlohmann::json head{{"format", "ndlcoef1"},
                      {"kind", coeffs.kind == needlet_kind::spin ? "spin" : "mixed"},
                      {"spin", coeffs.spin},
                      {"bank_spin", bank.spin()},
                      {"B", bank.filter().B()},
                      {"j_min", coeffs.j_min},
                      {"j_max", coeffs.j_max()}};
  std::string out = head.dump();
  out += '\n';
  for (int j = coeffs.j_min; j <= coeffs.j_max(); ++j) {
    const auto& lev = bank.level(j);
    const auto& beta = coeffs.level(j);
    require(beta.size() == lev.grid->npoints(), errc::invalid_input,
            "level " + std::to_string(j) + " does not match the bank grid");
    nlohmann::json lh{{"j", j}, {"bandlimit", lev.bandlimit}, {"n", beta.size()}};
    out += lh.dump();
    out += '\n';
    for (std::size_t k = 0; k < beta.size(); ++k) {
      const int r = lev.grid->ring_of(k);
      const nlohmann::json row = {k,
                                  lev.grid->theta(r),
                                  lev.grid->phi(lev.grid->phi_index_of(k)),
                                  lev.grid->point_weight(r),
                                  beta[k].real(),
                                  beta[k].imag()};
      out += row.dump();
      out += '\n';
    }
  }
  atomic_write(path, out);
}

} // namespace spinlet
