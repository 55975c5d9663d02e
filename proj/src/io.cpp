#include "omniloc/io.hpp"

#include <json.hpp>
#include <png.h>

#include <Eigen/Geometry>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace omniloc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw std::runtime_error(path + ": " + message);
}

[[noreturn]] void fail_line(const std::string& path, int line, const std::string& message) {
  throw std::runtime_error(path + ": line " + std::to_string(line) + ": " + message);
}

struct PlyProperty {
  std::string name;
  std::string type;
  int size = 0;
};

struct PlyElement {
  std::string name;
  long count = 0;
  std::vector<PlyProperty> properties;
  bool has_list = false;

  int record_size() const {
    int s = 0;
    for (const PlyProperty& p : properties) s += p.size;
    return s;
  }
};

int ply_type_size(const std::string& type) {
  if (type == "char" || type == "int8" || type == "uchar" || type == "uint8") return 1;
  if (type == "short" || type == "int16" || type == "ushort" || type == "uint16") return 2;
  if (type == "int" || type == "int32" || type == "uint" || type == "uint32") return 4;
  if (type == "float" || type == "float32") return 4;
  if (type == "double" || type == "float64") return 8;
  return 0;
}

bool is_float_type(const std::string& type) {
  return type == "float" || type == "float32" || type == "double" || type == "float64";
}

bool is_uchar_type(const std::string& type) { return type == "uchar" || type == "uint8"; }

double parse_binary_scalar(const unsigned char* p, const std::string& type) {
  if (type == "float" || type == "float32") {
    float v;
    std::memcpy(&v, p, 4);
    return static_cast<double>(v);
  }
  if (type == "double" || type == "float64") {
    double v;
    std::memcpy(&v, p, 8);
    return v;
  }
  if (type == "uchar" || type == "uint8") return static_cast<double>(*p);
  if (type == "char" || type == "int8") {
    return static_cast<double>(*reinterpret_cast<const signed char*>(p));
  }
  if (type == "ushort" || type == "uint16") {
    std::uint16_t v;
    std::memcpy(&v, p, 2);
    return static_cast<double>(v);
  }
  if (type == "short" || type == "int16") {
    std::int16_t v;
    std::memcpy(&v, p, 2);
    return static_cast<double>(v);
  }
  if (type == "uint" || type == "uint32") {
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    return static_cast<double>(v);
  }
  std::int32_t v;
  std::memcpy(&v, p, 4);
  return static_cast<double>(v);
}

}  // namespace

PointCloud load_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");

  int line_no = 0;
  std::string line;
  const auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) fail_line(path, line_no + 1, "unexpected end of header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  if (next_line() != "ply") fail_line(path, line_no, "not a PLY file (missing 'ply' magic)");

  bool binary = false;
  bool have_format = false;
  std::vector<PlyElement> elements;

  for (;;) {
    std::istringstream ls(next_line());
    std::string keyword;
    ls >> keyword;
    if (keyword == "comment" || keyword == "obj_info" || keyword.empty()) continue;
    if (keyword == "format") {
      std::string kind, version;
      ls >> kind >> version;
      if (kind == "ascii") {
        binary = false;
      } else if (kind == "binary_little_endian") {
        binary = true;
      } else {
        fail_line(path, line_no, "unsupported format '" + kind + "'");
      }
      have_format = true;
    } else if (keyword == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      if (e.name.empty() || e.count < 0) fail_line(path, line_no, "malformed element");
      elements.push_back(e);
    } else if (keyword == "property") {
      if (elements.empty()) fail_line(path, line_no, "property before any element");
      std::string type;
      ls >> type;
      PlyProperty p;
      if (type == "list") {
        std::string count_type, value_type;
        ls >> count_type >> value_type >> p.name;
        elements.back().has_list = true;
        elements.back().properties.push_back(p);
        continue;
      }
      p.type = type;
      p.size = ply_type_size(type);
      ls >> p.name;
      if (p.size == 0) fail_line(path, line_no, "unknown property type '" + type + "'");
      elements.back().properties.push_back(p);
    } else if (keyword == "end_header") {
      break;
    } else {
      fail_line(path, line_no, "unrecognized header keyword '" + keyword + "'");
    }
  }
  if (!have_format) fail_line(path, line_no, "missing format declaration");

  std::size_t vertex_index = elements.size();
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (elements[i].name == "vertex") {
      vertex_index = i;
      break;
    }
  }
  if (vertex_index == elements.size()) fail_line(path, line_no, "no vertex element");
  const PlyElement& vertex = elements[vertex_index];
  if (vertex.has_list) fail_line(path, line_no, "list properties on vertices are unsupported");

  int idx_of[6] = {-1, -1, -1, -1, -1, -1};
  const char* wanted[6] = {"x", "y", "z", "red", "green", "blue"};
  for (std::size_t p = 0; p < vertex.properties.size(); ++p) {
    for (int w = 0; w < 6; ++w) {
      if (vertex.properties[p].name == wanted[w]) idx_of[w] = static_cast<int>(p);
    }
  }
  for (int w = 0; w < 6; ++w) {
    if (idx_of[w] < 0) {
      fail_line(path, line_no,
                std::string("vertex element lacks required property '") + wanted[w] + "'");
    }
  }
  for (int w = 0; w < 3; ++w) {
    if (!is_float_type(vertex.properties[static_cast<std::size_t>(idx_of[w])].type)) {
      fail_line(path, line_no, std::string(wanted[w]) + " must be float or double");
    }
  }
  for (int w = 3; w < 6; ++w) {
    if (!is_uchar_type(vertex.properties[static_cast<std::size_t>(idx_of[w])].type)) {
      fail_line(path, line_no, std::string(wanted[w]) + " must be uchar");
    }
  }

  // Skip any elements stored ahead of the vertices.
  for (std::size_t e = 0; e < vertex_index; ++e) {
    if (elements[e].has_list) {
      fail(path, "element '" + elements[e].name + "' precedes vertices and has list properties");
    }
    if (binary) {
      in.seekg(static_cast<std::streamoff>(elements[e].count) * elements[e].record_size(),
               std::ios::cur);
    } else {
      for (long i = 0; i < elements[e].count; ++i) {
        ++line_no;
        if (!std::getline(in, line)) fail(path, "unexpected end of file before vertex data");
      }
    }
  }

  PointMatrix positions(vertex.count, 3);
  PointMatrix colors(vertex.count, 3);

  if (binary) {
    const int record = vertex.record_size();
    std::vector<int> offsets(vertex.properties.size());
    int off = 0;
    for (std::size_t p = 0; p < vertex.properties.size(); ++p) {
      offsets[p] = off;
      off += vertex.properties[p].size;
    }
    std::vector<unsigned char> buffer(static_cast<std::size_t>(record));
    for (long i = 0; i < vertex.count; ++i) {
      in.read(reinterpret_cast<char*>(buffer.data()), record);
      if (in.gcount() != record) {
        fail(path, "unexpected end of file at vertex " + std::to_string(i) + " of " +
                       std::to_string(vertex.count));
      }
      for (int w = 0; w < 6; ++w) {
        const PlyProperty& p = vertex.properties[static_cast<std::size_t>(idx_of[w])];
        const double v = parse_binary_scalar(buffer.data() + offsets[idx_of[w]], p.type);
        if (w < 3) {
          positions(i, w) = v;
        } else {
          colors(i, w - 3) = v / 255.0;
        }
      }
    }
  } else {
    for (long i = 0; i < vertex.count; ++i) {
      ++line_no;
      if (!std::getline(in, line)) {
        fail_line(path, line_no, "unexpected end of file at vertex " + std::to_string(i));
      }
      std::istringstream ls(line);
      std::vector<double> values(vertex.properties.size());
      for (std::size_t p = 0; p < vertex.properties.size(); ++p) {
        if (!(ls >> values[p])) {
          fail_line(path, line_no, "malformed vertex line (expected " +
                                       std::to_string(vertex.properties.size()) + " values)");
        }
      }
      for (int w = 0; w < 3; ++w) positions(i, w) = values[static_cast<std::size_t>(idx_of[w])];
      for (int w = 3; w < 6; ++w) {
        colors(i, w - 3) = values[static_cast<std::size_t>(idx_of[w])] / 255.0;
      }
    }
  }

  PointCloud cloud(std::move(positions), std::move(colors));
  cloud.validate();
  return cloud;
}

void save_ply(const std::string& path, const PointCloud& cloud, bool binary) {
  cloud.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open file for writing");

  out << "ply\n";
  out << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n");
  out << "element vertex " << cloud.count() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";

  const auto quantize = [](double c) {
    const long v = std::lround(c * 255.0);
    return static_cast<unsigned char>(v < 0 ? 0 : (v > 255 ? 255 : v));
  };

  if (binary) {
    for (Eigen::Index i = 0; i < cloud.count(); ++i) {
      float xyz[3] = {static_cast<float>(cloud.positions(i, 0)),
                      static_cast<float>(cloud.positions(i, 1)),
                      static_cast<float>(cloud.positions(i, 2))};
      unsigned char rgb[3] = {quantize(cloud.colors(i, 0)), quantize(cloud.colors(i, 1)),
                              quantize(cloud.colors(i, 2))};
      out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
      out.write(reinterpret_cast<const char*>(rgb), sizeof(rgb));
    }
  } else {
    for (Eigen::Index i = 0; i < cloud.count(); ++i) {
      out << static_cast<float>(cloud.positions(i, 0)) << ' '
          << static_cast<float>(cloud.positions(i, 1)) << ' '
          << static_cast<float>(cloud.positions(i, 2)) << ' '
          << static_cast<int>(quantize(cloud.colors(i, 0))) << ' '
          << static_cast<int>(quantize(cloud.colors(i, 1))) << ' '
          << static_cast<int>(quantize(cloud.colors(i, 2))) << '\n';
    }
  }
  if (!out) fail(path, "write failed");
}

namespace {

struct PngReadCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngReadCloser() {
    if (png != nullptr) png_destroy_read_struct(&png, info != nullptr ? &info : nullptr, nullptr);
    if (fp != nullptr) std::fclose(fp);
  }
};

struct PngWriteCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngWriteCloser() {
    if (png != nullptr) png_destroy_write_struct(&png, info != nullptr ? &info : nullptr);
    if (fp != nullptr) std::fclose(fp);
  }
};

}  // namespace

Panorama load_png(const std::string& path) {
  PngReadCloser ctx;
  ctx.fp = std::fopen(path.c_str(), "rb");
  if (ctx.fp == nullptr) fail(path, "cannot open file");

  unsigned char sig[8];
  if (std::fread(sig, 1, 8, ctx.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    fail(path, "not a PNG file");
  }

  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (ctx.png == nullptr) fail(path, "png_create_read_struct failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (ctx.info == nullptr) fail(path, "png_create_info_struct failed");
  if (setjmp(png_jmpbuf(ctx.png))) fail(path, "PNG decode error");

  png_init_io(ctx.png, ctx.fp);
  png_set_sig_bytes(ctx.png, 8);
  png_read_info(ctx.png, ctx.info);

  const png_uint_32 width = png_get_image_width(ctx.png, ctx.info);
  const png_uint_32 height = png_get_image_height(ctx.png, ctx.info);
  const png_byte color_type = png_get_color_type(ctx.png, ctx.info);
  const png_byte bit_depth = png_get_bit_depth(ctx.png, ctx.info);

  if (bit_depth == 16) png_set_strip_16(ctx.png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ctx.png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(ctx.png);
  if (png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS) != 0) png_set_tRNS_to_alpha(ctx.png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(ctx.png);
  }
  if ((color_type & PNG_COLOR_MASK_ALPHA) != 0 ||
      png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS) != 0) {
    png_set_strip_alpha(ctx.png);
  }
  png_read_update_info(ctx.png, ctx.info);

  if (png_get_channels(ctx.png, ctx.info) != 3) fail(path, "could not normalize PNG to RGB");

  std::vector<unsigned char> pixels(static_cast<std::size_t>(height) * width * 3);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 r = 0; r < height; ++r) {
    rows[r] = pixels.data() + static_cast<std::size_t>(r) * width * 3;
  }
  png_read_image(ctx.png, rows.data());
  png_read_end(ctx.png, nullptr);

  if (width != 2 * height) {
    std::cerr << path << ": warning: " << width << "x" << height
              << " is not 2:1; treating it as equirectangular anyway\n";
  }

  Panorama image(static_cast<int>(height), static_cast<int>(width));
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    image.data[i] = static_cast<double>(pixels[i]) / 255.0;
  }
  return image;
}

void save_png(const std::string& path, const Panorama& image) {
  image.validate();
  PngWriteCloser ctx;
  ctx.fp = std::fopen(path.c_str(), "wb");
  if (ctx.fp == nullptr) fail(path, "cannot open file for writing");

  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (ctx.png == nullptr) fail(path, "png_create_write_struct failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (ctx.info == nullptr) fail(path, "png_create_info_struct failed");
  if (setjmp(png_jmpbuf(ctx.png))) fail(path, "PNG encode error");

  png_init_io(ctx.png, ctx.fp);
  png_set_IHDR(ctx.png, ctx.info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);

  std::vector<unsigned char> row_buf(static_cast<std::size_t>(image.width) * 3);
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        const long v = std::lround(image.at(r, c, ch) * 255.0);
        row_buf[static_cast<std::size_t>(c) * 3 + ch] =
            static_cast<unsigned char>(v < 0 ? 0 : (v > 255 ? 255 : v));
      }
    }
    png_write_row(ctx.png, row_buf.data());
  }
  png_write_end(ctx.png, nullptr);
}

namespace {

bool parse_bool(const std::string& value, const std::string& path, int line) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  fail_line(path, line, "expected a boolean, got '" + value + "'");
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  std::size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

}  // namespace

LocalizeConfig parse_config_text(const std::string& text, LocalizeConfig base) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  const std::string path = "<config>";
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail_line(path, line_no, "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "n_t") {
        base.n_t = std::stoi(value);
      } else if (key == "n_r") {
        base.n_r = std::stoi(value);
      } else if (key == "n_iter") {
        base.n_iter = std::stoi(value);
      } else if (key == "k1") {
        base.k1 = std::stoi(value);
      } else if (key == "k2") {
        base.k2 = std::stoi(value);
      } else if (key == "alpha0") {
        base.alpha0 = std::stod(value);
      } else if (key == "gravity_known") {
        base.gravity_known = parse_bool(value, path, line_no);
      } else if (key == "seed") {
        base.seed = std::stoull(value);
      } else if (key == "decay_factor") {
        base.decay_factor = std::stod(value);
      } else if (key == "patience") {
        base.patience = std::stoi(value);
      } else if (key == "use_histogram_filter") {
        base.use_histogram_filter = parse_bool(value, path, line_no);
      } else {
        fail_line(path, line_no, "unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      fail_line(path, line_no, "malformed value '" + value + "' for key '" + key + "'");
    } catch (const std::out_of_range&) {
      fail_line(path, line_no, "value '" + value + "' out of range for key '" + key + "'");
    }
  }
  return base;
}

LocalizeConfig load_config(const std::string& path, LocalizeConfig base) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open config file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config_text(buffer.str(), base);
  } catch (const std::runtime_error& e) {
    std::string message = e.what();
    const std::string placeholder = "<config>";
    const std::size_t pos = message.find(placeholder);
    if (pos != std::string::npos) message.replace(pos, placeholder.size(), path);
    throw std::runtime_error(message);
  }
}

namespace {

json pose_to_json(const Pose& pose) {
  Eigen::Quaterniond q(pose.rotation);
  q.normalize();
  if (q.w() < 0.0 || (q.w() == 0.0 && (q.x() < 0.0 || (q.x() == 0.0 && (q.y() < 0.0 ||
      (q.y() == 0.0 && q.z() < 0.0)))))) {
    q.coeffs() = -q.coeffs();
  }
  json rotation;
  rotation["quaternion_wxyz"] = {q.w(), q.x(), q.y(), q.z()};
  json matrix = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) matrix.push_back(pose.rotation(r, c));
  }
  rotation["matrix_row_major"] = matrix;
  json out;
  out["rotation"] = rotation;
  out["translation"] = {pose.translation[0], pose.translation[1], pose.translation[2]};
  return out;
}

Pose pose_from_json(const json& j, const std::string& path) {
  if (!j.contains("rotation") || !j.contains("translation")) {
    fail(path, "missing rotation/translation fields");
  }
  const json& m = j["rotation"]["matrix_row_major"];
  if (!m.is_array() || m.size() != 9) fail(path, "rotation matrix must have 9 entries");
  Mat3 rotation;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rotation(r, c) = m[static_cast<std::size_t>(r * 3 + c)];
  }
  const json& t = j["translation"];
  if (!t.is_array() || t.size() != 3) fail(path, "translation must have 3 entries");
  Pose pose(rotation, Vec3(t[0], t[1], t[2]));
  pose.validate();
  return pose;
}

json config_to_json(const LocalizeConfig& config) {
  json c;
  c["n_t"] = config.n_t;
  c["n_r"] = config.n_r;
  c["n_iter"] = config.n_iter;
  c["k1"] = config.k1;
  c["k2"] = config.k2;
  c["alpha0"] = config.alpha0;
  c["gravity_known"] = config.gravity_known;
  c["seed"] = config.seed;
  c["decay_factor"] = config.decay_factor;
  c["patience"] = config.patience;
  c["use_histogram_filter"] = config.use_histogram_filter;
  return c;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open file for writing");
  out << j.dump(2) << '\n';
  if (!out) fail(path, "write failed");
}

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    fail(path, std::string("JSON parse error: ") + e.what());
  }
  return j;
}

}  // namespace

void save_result_json(const std::string& path, const LocalizationResult& result,
                      const LocalizeConfig& config, bool omit_timings) {
  json j = pose_to_json(result.best_pose);
  j["final_loss"] = result.best_loss;
  j["failed"] = result.failed;
  j["candidate_count"] = result.candidate_count;
  json trajectories = json::array();
  for (const RefinementTrace& trace : result.traces) {
    trajectories.push_back(trace.loss_history);
  }
  j["loss_trajectories"] = trajectories;
  json timings;
  timings["init_seconds"] = omit_timings ? 0.0 : result.init_seconds;
  timings["refine_seconds"] = omit_timings ? 0.0 : result.refine_seconds;
  j["timings"] = timings;
  j["config"] = config_to_json(config);
  j["seed"] = config.seed;
  write_json_file(path, j);
}

ResultFileData load_result_json(const std::string& path) {
  const json j = load_json_file(path);
  ResultFileData data;
  data.pose = pose_from_json(j, path);
  if (j.contains("final_loss") && j["final_loss"].is_number()) {
    data.final_loss = j["final_loss"];
  } else {
    data.final_loss = std::numeric_limits<double>::infinity();
  }
  data.failed = j.value("failed", false);
  return data;
}

void save_oracle_json(const std::string& path, const Pose& pose, const Vec3& bbox_min,
                      const Vec3& bbox_max) {
  json j = pose_to_json(pose);
  j["bbox_min"] = {bbox_min[0], bbox_min[1], bbox_min[2]};
  j["bbox_max"] = {bbox_max[0], bbox_max[1], bbox_max[2]};
  write_json_file(path, j);
}

OracleFileData load_oracle_json(const std::string& path) {
  const json j = load_json_file(path);
  OracleFileData data;
  data.pose = pose_from_json(j, path);
  const auto read_vec = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3) {
      fail(path, std::string("missing or malformed '") + key + "'");
    }
    return Vec3(j[key][0], j[key][1], j[key][2]);
  };
  data.bbox_min = read_vec("bbox_min");
  data.bbox_max = read_vec("bbox_max");
  return data;
}

void save_descriptor_json(const std::string& path, const SceneDescriptor& descriptor) {
  const SceneParams& p = descriptor.params;
  json j;
  j["seed"] = p.seed;
  j["room_extent"] = {p.room_extent[0], p.room_extent[1], p.room_extent[2]};
  j["points_per_m2"] = p.points_per_m2;
  switch (p.texture) {
    case TextureMode::kChecker: j["texture"] = "checker"; break;
    case TextureMode::kNoise: j["texture"] = "noise"; break;
    case TextureMode::kSemanticFlat: j["texture"] = "semantic_flat"; break;
  }
  j["gravity_aligned"] = p.gravity_aligned;
  j["pano_height"] = p.pano_height;
  j["pano_width"] = p.pano_width;
  j["splat_radius_px"] = p.splat_radius_px;
  if (p.texture == TextureMode::kNoise) j["noise_step"] = p.noise_step;
  j["repeated_wall_texture"] = p.repeated_wall_texture;
  j["base_color_weight"] = p.base_color_weight;
  j["total_area_m2"] = descriptor.total_area;
  json boxes = json::array();
  for (const Box& b : descriptor.boxes) {
    json box;
    box["min"] = {b.min[0], b.min[1], b.min[2]};
    box["max"] = {b.max[0], b.max[1], b.max[2]};
    boxes.push_back(box);
  }
  j["boxes"] = boxes;
  write_json_file(path, j);
}

void save_summary_json(const std::string& path, const BatchSummary& summary) {
  json j;
  j["t_error_quartiles_m"] = {summary.t_quartiles[0], summary.t_quartiles[1],
                              summary.t_quartiles[2]};
  j["r_error_quartiles_deg"] = {summary.r_quartiles[0], summary.r_quartiles[1],
                                summary.r_quartiles[2]};
  j["accuracy"] = summary.accuracy;
  j["count"] = summary.count;
  write_json_file(path, j);
}

}  // namespace omniloc
