#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "mwcalib/error.hpp"
#include "mwcalib/image.hpp"

namespace mwcalib {

Image read_image(const std::filesystem::path& path) {
  const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) {
    throw Error(ErrorCode::kIo, "cannot decode image " + path.string());
  }
  if (bgr.depth() != CV_8U) {
    throw Error(ErrorCode::kParse, "only 8-bit images are supported: " + path.string());
  }
  Image img(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      std::uint8_t* p = img.pixel(x, y);
      p[0] = row[x][2];
      p[1] = row[x][1];
      p[2] = row[x][0];
    }
  }
  return img;
}

void write_image(const std::filesystem::path& path, const Image& img) {
  cv::Mat bgr(img.height(), img.width(), CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width(); ++x) {
      const std::uint8_t* p = img.pixel(x, y);
      row[x] = cv::Vec3b(p[2], p[1], p[0]);
    }
  }
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr);
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::kIo, "cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

}  // namespace mwcalib
