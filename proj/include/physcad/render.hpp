#pragma once

#include "physcad/geometry.hpp"
#include "physcad/loadcase.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace physcad {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; ///< RGB, row-major from the top-left

    Image() = default;
    Image(int w, int h, Rgb fill = {255, 255, 255});
    Rgb at(int x, int y) const;
    void set(int x, int y, Rgb c);
    bool operator==(const Image&) const = default;
};

enum class ViewDirection { PosX, NegX, PosY, NegY, PosZ, NegZ, Iso };

/// "+x", "-x", ..., "iso".
std::string to_string(ViewDirection d);
/// File-name friendly form: "px", "nx", ..., "iso".
std::string file_tag(ViewDirection d);
ViewDirection view_direction_from_string(const std::string& s);

/// The camera sits on the named side of the scene looking back at it. Side
/// views keep +z up, the z views keep +y up, and the isometric view looks from
/// (+1, -1, +1).
struct ViewSpec {
    ViewDirection direction = ViewDirection::Iso;
    int width = 512;
    int height = 512;
    bool draw_domain = true;
    bool draw_selectors = true;
};

inline constexpr Rgb kBackground{255, 255, 255};
inline constexpr Rgb kDomainColor{120, 120, 120};
inline constexpr Rgb kSupportColor{0, 170, 0};
inline constexpr Rgb kLoadColor{220, 0, 0};

/// Orthographic z-buffered rendering fitted to the domain box with a 5% margin.
/// Geometry is flat shaded gray; wireframes are drawn over it. Throws
/// std::invalid_argument for images smaller than 64 x 64.
Image render_view(const SurfaceMesh& mesh, const LoadCase& c, const ViewSpec& view);

/// +x, +y, +z and isometric.
std::vector<ViewDirection> default_views();

std::vector<std::uint8_t> encode_ppm(const Image& img);
/// Reads binary P6 with maxval 255; comments in the header are allowed.
Image decode_ppm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const Image& img);

} // namespace physcad
