#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

namespace outgen {

// Content digest over pixel bytes (shape-sensitive); used for determinism
// checks and recorded-score lookups.
uint64_t image_digest(const cv::Mat& image);

uint64_t file_digest(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Lossless raster I/O (PNG).
cv::Mat read_image(const std::filesystem::path& path, bool grayscale = false);
void write_image(const std::filesystem::path& path, const cv::Mat& image);
std::vector<unsigned char> encode_png(const cv::Mat& image);
cv::Mat decode_png(const std::vector<unsigned char>& bytes);

std::string base64_encode(const unsigned char* data, size_t len);
std::string base64_encode(const std::vector<unsigned char>& data);
std::vector<unsigned char> base64_decode(const std::string& text);

}  // namespace outgen
