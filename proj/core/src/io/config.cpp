#include "swbf/io/config.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>

#include "swbf/error.hpp"
#include "swbf/io/archive.hpp"

namespace swbf::io {

namespace {

struct Entry {
  std::string value;
  std::size_t line = 0;
  bool used = false;
};

struct Section {
  std::string name;
  std::size_t line = 0;
  std::map<std::string, Entry> keys;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Parser {
 public:
  explicit Parser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void error(std::size_t line, const std::string& msg) const {
    fail(ErrorKind::Config, source_ + ":" + std::to_string(line) + ": " + msg);
  }

  std::vector<Section> parse(std::string_view text) const {
    std::vector<Section> sections;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      auto line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') error(line_no, "unterminated section header");
        const auto name = trim(line.substr(1, line.size() - 2));
        if (name.empty()) error(line_no, "empty section name");
        sections.push_back({std::string(name), line_no, {}});
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) error(line_no, "expected key = value");
      if (sections.empty()) error(line_no, "key outside of any section");
      const auto key = std::string(trim(line.substr(0, eq)));
      const auto value = std::string(trim(line.substr(eq + 1)));
      if (key.empty()) error(line_no, "empty key");
      auto& sec = sections.back();
      if (!sec.keys.emplace(key, Entry{value, line_no}).second) {
        error(line_no, "duplicate key '" + key + "' in [" + sec.name + "]");
      }
    }
    return sections;
  }

  Entry* find(Section& s, const std::string& key) const {
    const auto it = s.keys.find(key);
    if (it == s.keys.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  Entry& need(Section& s, const std::string& key) const {
    auto* e = find(s, key);
    if (!e) error(s.line, "missing required key '" + key + "' in [" + s.name + "]");
    return *e;
  }

  double to_real(const Section& s, const std::string& key, const Entry& e) const {
    double v = 0.0;
    const auto* first = e.value.data();
    const auto* last = first + e.value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
      error(e.line, "field '" + key + "' in [" + s.name + "]: expected a number, got '" + e.value + "'");
    }
    return v;
  }

  std::uint64_t to_count(const Section& s, const std::string& key, const Entry& e) const {
    std::uint64_t v = 0;
    const auto* first = e.value.data();
    const auto* last = first + e.value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
      error(e.line, "field '" + key + "' in [" + s.name + "]: expected a non-negative integer, got '" + e.value + "'");
    }
    return v;
  }

  void real(Section& s, const std::string& key, double& out, double scale = 1.0) const {
    if (auto* e = find(s, key)) out = to_real(s, key, *e) * scale;
  }
  void required_real(Section& s, const std::string& key, double& out, double scale = 1.0) const {
    out = to_real(s, key, need(s, key)) * scale;
  }
  template <typename U>
  void count(Section& s, const std::string& key, U& out) const {
    if (auto* e = find(s, key)) out = static_cast<U>(to_count(s, key, *e));
  }
  template <typename U>
  void required_count(Section& s, const std::string& key, U& out) const {
    out = static_cast<U>(to_count(s, key, need(s, key)));
  }
  void optional_real(Section& s, const std::string& key, std::optional<double>& out) const {
    if (auto* e = find(s, key)) out = to_real(s, key, *e);
  }

  void finish(const Section& s) const {
    for (const auto& [key, e] : s.keys) {
      if (!e.used) error(e.line, "unknown key '" + key + "' in [" + s.name + "]");
    }
  }

  // Re-throws a validation failure as a config diagnostic at the section header.
  template <typename F>
  void checked(const Section& s, F&& validate) const {
    try {
      validate();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Config) throw;
      error(s.line, "[" + s.name + "]: " + e.what());
    }
  }

 private:
  std::string source_;
};

constexpr double kMm = 1e-3;
constexpr double kMhz = 1e6;

void read_geometry(const Parser& p, Section& s, ArrayGeometry& g) {
  p.required_count(s, "elements", g.element_count);
  p.required_count(s, "aperture", g.aperture_size);
  p.required_count(s, "scan_lines", g.scan_lines);
  p.required_count(s, "depth_samples", g.depth_samples);
  p.required_real(s, "pitch_mm", g.pitch, kMm);
  p.required_real(s, "sound_speed", g.sound_speed);
  p.required_real(s, "sampling_freq_mhz", g.sampling_freq, kMhz);
  p.required_real(s, "center_freq_mhz", g.center_freq, kMhz);
  p.required_real(s, "focal_depth_mm", g.focal_depth, kMm);
  p.finish(s);
  p.checked(s, [&] { g.validate(); });
}

RegionSpec read_region(const Parser& p, Section& s) {
  RegionSpec r;
  if (auto* e = p.find(s, "label")) r.label = e->value;
  const auto& shape = p.need(s, "shape");
  if (shape.value == "rect") {
    r.shape = RegionShape::Rectangle;
    p.required_real(s, "x_min_mm", r.x_min, kMm);
    p.required_real(s, "x_max_mm", r.x_max, kMm);
    p.required_real(s, "z_min_mm", r.z_min, kMm);
    p.required_real(s, "z_max_mm", r.z_max, kMm);
  } else if (shape.value == "disk") {
    r.shape = RegionShape::Disk;
    p.required_real(s, "center_x_mm", r.center_x, kMm);
    p.required_real(s, "center_z_mm", r.center_z, kMm);
    p.required_real(s, "radius_mm", r.radius, kMm);
  } else {
    p.error(shape.line, "field 'shape' in [region]: expected rect or disk, got '" + shape.value + "'");
  }
  p.real(s, "echogenicity", r.echogenicity);
  p.required_real(s, "density_per_mm2", r.density_per_mm2);
  p.finish(s);
  return r;
}

Scatterer read_scatterer(const Parser& p, Section& s) {
  Scatterer sc;
  sc.amplitude = 1.0;
  p.required_real(s, "lateral_mm", sc.lateral, kMm);
  p.required_real(s, "axial_mm", sc.axial, kMm);
  p.real(s, "amplitude", sc.amplitude);
  p.finish(s);
  return sc;
}

std::vector<Style> parse_styles(const Parser& p, const Entry& e) {
  std::vector<Style> out;
  std::string_view rest = e.value;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto tok = trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const auto style = parse_style(tok);
    if (!style) p.error(e.line, "field 'styles' in [training]: unknown style '" + std::string(tok) + "'");
    out.push_back(*style);
  }
  if (out.empty()) p.error(e.line, "field 'styles' in [training]: empty list");
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  const Parser p(source);
  auto sections = p.parse(text);
  ExperimentConfig cfg;
  std::set<std::string> seen;
  bool have_geometry = false;
  for (auto& s : sections) {
    const bool repeatable = s.name == "region" || s.name == "scatterer";
    if (!repeatable && !seen.insert(s.name).second) p.error(s.line, "duplicate section [" + s.name + "]");
    if (s.name == "geometry") {
      read_geometry(p, s, cfg.geometry);
      have_geometry = true;
    } else if (s.name == "pulse") {
      p.real(s, "fractional_bandwidth", cfg.pulse.fractional_bandwidth);
      p.real(s, "length_cycles", cfg.pulse.length_cycles);
      p.finish(s);
    } else if (s.name == "phantom") {
      p.count(s, "seed", cfg.phantom_seed);
      p.finish(s);
    } else if (s.name == "region") {
      cfg.phantom.regions.push_back(read_region(p, s));
    } else if (s.name == "scatterer") {
      cfg.phantom.scatterers.push_back(read_scatterer(p, s));
    } else if (s.name == "pipeline") {
      if (auto* e = p.find(s, "psf")) {
        if (e->value == "simulated") {
          cfg.psf_source = PsfSource::Simulated;
        } else if (e->value == "estimated") {
          cfg.psf_source = PsfSource::Estimated;
        } else {
          p.error(e->line, "field 'psf' in [pipeline]: expected simulated or estimated, got '" + e->value + "'");
        }
      }
      p.count(s, "psf_axial", cfg.psf_axial);
      p.count(s, "psf_lateral", cfg.psf_lateral);
      p.real(s, "lambda", cfg.pipeline.deconv.lambda);
      p.count(s, "max_iters", cfg.pipeline.deconv.max_iters);
      p.real(s, "tol", cfg.pipeline.deconv.tol);
      p.real(s, "dynamic_range", cfg.pipeline.dynamic_range);
      p.finish(s);
      p.checked(s, [&] {
        require(cfg.pipeline.deconv.lambda >= 0.0, ErrorKind::InvalidArgument, "lambda must be >= 0");
        require(cfg.pipeline.dynamic_range > 0.0, ErrorKind::InvalidArgument, "dynamic_range must be > 0");
        require(cfg.psf_axial % 2 == 1 && cfg.psf_lateral % 2 == 1, ErrorKind::InvalidArgument,
                "psf_axial and psf_lateral must be odd");
      });
    } else if (s.name == "despeckle") {
      auto& d = cfg.pipeline.despeckle;
      p.count(s, "patch", d.patch);
      p.count(s, "stride", d.stride);
      p.count(s, "search_radius", d.search_radius);
      p.count(s, "group_size", d.group_size);
      p.count(s, "guidance_window", d.guidance_window);
      p.count(s, "iterations", d.iterations);
      p.optional_real(s, "noise_sigma", d.noise_sigma);
      p.optional_real(s, "wnnm_c", d.wnnm_c);
      p.finish(s);
      p.checked(s, [&] { d.validate(); });
    } else if (s.name == "training") {
      auto& t = cfg.training;
      p.count(s, "epochs", t.train.epochs);
      p.count(s, "batch", t.train.batch);
      p.count(s, "patience", t.train.patience);
      p.real(s, "lr0", t.train.adam.lr0);
      p.count(s, "seed", t.train.seed);
      p.count(s, "split_seed", t.split_seed);
      p.count(s, "init_seed", t.init_seed);
      p.count(s, "frames", t.frames);
      p.real(s, "val_fraction", t.val_fraction);
      if (auto* e = p.find(s, "styles")) t.train.styles = parse_styles(p, *e);
      if (auto* e = p.find(s, "style_sampling")) {
        if (e->value == "all") {
          t.train.sampling = StyleSampling::All;
        } else if (e->value == "random") {
          t.train.sampling = StyleSampling::Random;
        } else {
          p.error(e->line, "field 'style_sampling' in [training]: expected all or random, got '" + e->value + "'");
        }
      }
      p.finish(s);
      p.checked(s, [&] {
        require(t.train.epochs >= 1 && t.train.batch >= 1 && t.frames >= 1, ErrorKind::InvalidArgument,
                "epochs, batch and frames must be >= 1");
        require(t.train.adam.lr0 > 0.0, ErrorKind::InvalidArgument, "lr0 must be > 0");
        require(t.val_fraction >= 0.0 && t.val_fraction < 1.0, ErrorKind::InvalidArgument,
                "val_fraction must be in [0, 1)");
      });
    } else if (s.name == "architecture") {
      p.count(s, "width", cfg.arch.width);
      p.count(s, "bottleneck", cfg.arch.bottleneck);
      p.count(s, "gen_hidden1", cfg.arch.gen_hidden1);
      p.count(s, "gen_hidden2", cfg.arch.gen_hidden2);
      p.count(s, "context", cfg.arch.context);
      p.real(s, "leaky_slope", cfg.arch.leaky_slope);
      p.finish(s);
      p.checked(s, [&] {
        require(cfg.arch.context % 2 == 1, ErrorKind::InvalidArgument, "context must be odd");
        cfg.arch.validate();
      });
    } else {
      p.error(s.line, "unknown section [" + s.name + "]");
    }
  }
  if (!have_geometry) p.error(1, "missing required section [geometry]");
  cfg.pulse.center_freq = cfg.geometry.center_freq;
  cfg.arch.in_channels = cfg.geometry.aperture_size;
  cfg.arch.lines = cfg.geometry.scan_lines;
  try {
    cfg.pulse.validate();
    cfg.phantom.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Config, source + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.string());
}

Psf resolve_psf(const ExperimentConfig& config, const ApertureCube& cube) {
  if (config.psf_source == PsfSource::Simulated) return simulated_psf(cube.geom, config.pulse);
  return estimate_psf(envelope_image(das(cube)), config.psf_axial, config.psf_lateral);
}

RegionMask parse_mask_spec(std::string_view text, std::size_t rows, std::size_t cols, const std::string& source) {
  const Parser p(source);
  auto sections = p.parse(text);
  RegionMask mask;
  const auto R = static_cast<Eigen::Index>(rows);
  const auto C = static_cast<Eigen::Index>(cols);
  bool have_target = false, have_background = false;
  for (auto& s : sections) {
    BoolMatrix* dst = nullptr;
    if (s.name == "target") {
      if (have_target) p.error(s.line, "duplicate section [target]");
      have_target = true;
      dst = &mask.target;
    } else if (s.name == "background") {
      if (have_background) p.error(s.line, "duplicate section [background]");
      have_background = true;
      dst = &mask.background;
    } else {
      p.error(s.line, "unknown section [" + s.name + "]");
    }
    *dst = BoolMatrix::Constant(R, C, false);
    const auto& shape = p.need(s, "shape");
    if (shape.value == "rect") {
      double r0 = 0, r1 = 0, c0 = 0, c1 = 0;
      p.required_real(s, "row_min", r0);
      p.required_real(s, "row_max", r1);
      p.required_real(s, "col_min", c0);
      p.required_real(s, "col_max", c1);
      for (Eigen::Index r = 0; r < R; ++r) {
        for (Eigen::Index c = 0; c < C; ++c) {
          (*dst)(r, c) = static_cast<double>(r) >= r0 && static_cast<double>(r) <= r1 &&
                         static_cast<double>(c) >= c0 && static_cast<double>(c) <= c1;
        }
      }
    } else if (shape.value == "disk" || shape.value == "ring") {
      double cr = 0, cc = 0, in_r = 0, in_c = 0, out_r = 0, out_c = 0;
      p.required_real(s, "center_row", cr);
      p.required_real(s, "center_col", cc);
      const bool ring = shape.value == "ring";
      if (ring) {
        p.required_real(s, "inner_rows", in_r);
        p.required_real(s, "inner_cols", in_c);
        p.required_real(s, "outer_rows", out_r);
        p.required_real(s, "outer_cols", out_c);
      } else {
        p.required_real(s, "radius_rows", out_r);
        p.required_real(s, "radius_cols", out_c);
      }
      if (out_r <= 0.0 || out_c <= 0.0 || (ring && (in_r <= 0.0 || in_c <= 0.0))) {
        p.error(s.line, "[" + s.name + "]: radii must be positive");
      }
      for (Eigen::Index r = 0; r < R; ++r) {
        for (Eigen::Index c = 0; c < C; ++c) {
          const double dr = static_cast<double>(r) - cr;
          const double dc = static_cast<double>(c) - cc;
          const double outer = (dr / out_r) * (dr / out_r) + (dc / out_c) * (dc / out_c);
          bool inside = outer <= 1.0;
          if (ring) inside = inside && (dr / in_r) * (dr / in_r) + (dc / in_c) * (dc / in_c) > 1.0;
          (*dst)(r, c) = inside;
        }
      }
    } else {
      p.error(shape.line, "field 'shape' in [" + s.name + "]: expected rect, disk or ring, got '" + shape.value + "'");
    }
    p.finish(s);
  }
  if (!have_target || !have_background) p.error(1, "mask spec needs both [target] and [background]");
  try {
    mask.validate(R, C);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::EmptyRegion) throw;
    fail(ErrorKind::Config, source + ": " + e.what());
  }
  return mask;
}

RegionMask load_mask_spec(const std::filesystem::path& path, std::size_t rows, std::size_t cols) {
  return parse_mask_spec(read_file(path), rows, cols, path.string());
}

}  // namespace swbf::io
