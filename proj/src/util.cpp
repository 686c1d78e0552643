#include "outgen/util.hpp"

#include <fstream>
#include <sstream>

#include <opencv2/imgcodecs.hpp>

#include "outgen/error.hpp"
#include "outgen/rng.hpp"

namespace outgen {

uint64_t image_digest(const cv::Mat& image) {
  uint64_t h = 14695981039346656037ull;
  int meta[3] = {image.rows, image.cols, image.type()};
  h = fnv1a64(std::string_view(reinterpret_cast<const char*>(meta), sizeof(meta)), h);
  for (int r = 0; r < image.rows; ++r) {
    const char* row = reinterpret_cast<const char*>(image.ptr(r));
    h = fnv1a64(std::string_view(row, image.cols * image.elemSize()), h);
  }
  return h;
}

uint64_t file_digest(const std::filesystem::path& path) {
  return fnv1a64(read_text_file(path));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write file: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

cv::Mat read_image(const std::filesystem::path& path, bool grayscale) {
  cv::Mat img = cv::imread(path.string(),
                           grayscale ? cv::IMREAD_GRAYSCALE : cv::IMREAD_COLOR);
  if (img.empty()) throw IoError("cannot read image: " + path.string());
  return img;
}

void write_image(const std::filesystem::path& path, const cv::Mat& image) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), image))
    throw IoError("cannot write image: " + path.string());
}

std::vector<unsigned char> encode_png(const cv::Mat& image) {
  std::vector<unsigned char> bytes;
  if (!cv::imencode(".png", image, bytes))
    throw IoError("PNG encoding failed");
  return bytes;
}

cv::Mat decode_png(const std::vector<unsigned char>& bytes) {
  cv::Mat img = cv::imdecode(bytes, cv::IMREAD_UNCHANGED);
  if (img.empty()) throw IoError("PNG decoding failed");
  return img;
}

namespace {
constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}
}  // namespace

std::string base64_encode(const unsigned char* data, size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  for (size_t i = 0; i < len; i += 3) {
    uint32_t chunk = data[i] << 16;
    if (i + 1 < len) chunk |= data[i + 1] << 8;
    if (i + 2 < len) chunk |= data[i + 2];
    out += kB64Alphabet[(chunk >> 18) & 63];
    out += kB64Alphabet[(chunk >> 12) & 63];
    out += i + 1 < len ? kB64Alphabet[(chunk >> 6) & 63] : '=';
    out += i + 2 < len ? kB64Alphabet[chunk & 63] : '=';
  }
  return out;
}

std::string base64_encode(const std::vector<unsigned char>& data) {
  return base64_encode(data.data(), data.size());
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  uint32_t chunk = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    int v = b64_value(c);
    if (v < 0) throw ValidationError("invalid base64 character");
    chunk = (chunk << 6) | static_cast<uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((chunk >> bits) & 0xff));
    }
  }
  return out;
}

}  // namespace outgen
