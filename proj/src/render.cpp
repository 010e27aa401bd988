#include "physcad/render.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace physcad {

Image::Image(int w, int h, Rgb fill) : width(w), height(h), pixels(3 * std::size_t(w) * std::size_t(h))
{
    for (std::size_t i = 0; i < pixels.size(); i += 3) {
        pixels[i] = fill.r;
        pixels[i + 1] = fill.g;
        pixels[i + 2] = fill.b;
    }
}

Rgb Image::at(int x, int y) const
{
    const std::size_t i = 3 * (std::size_t(y) * width + x);
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void Image::set(int x, int y, Rgb c)
{
    const std::size_t i = 3 * (std::size_t(y) * width + x);
    pixels[i] = c.r;
    pixels[i + 1] = c.g;
    pixels[i + 2] = c.b;
}

namespace {

struct NamedView {
    ViewDirection dir;
    const char* name;
    const char* tag;
};

constexpr std::array<NamedView, 7> kViews{{
    {ViewDirection::PosX, "+x", "px"},
    {ViewDirection::NegX, "-x", "nx"},
    {ViewDirection::PosY, "+y", "py"},
    {ViewDirection::NegY, "-y", "ny"},
    {ViewDirection::PosZ, "+z", "pz"},
    {ViewDirection::NegZ, "-z", "nz"},
    {ViewDirection::Iso, "iso", "iso"},
}};

struct Camera {
    Vec3 right, up, forward;
    double scale = 1.0;
    double u0 = 0.0, v0 = 0.0;
    int width = 0, height = 0;

    // Pixel-space x, y and depth along the viewing direction.
    Vec3 project(const Vec3& p) const
    {
        return {0.5 * width + (p.dot(right) - u0) * scale, 0.5 * height - (p.dot(up) - v0) * scale,
                p.dot(forward)};
    }
};

Camera make_camera(const Box& domain, const ViewSpec& view)
{
    Vec3 eye, up_hint = Vec3::UnitZ();
    switch (view.direction) {
    case ViewDirection::PosX: eye = Vec3::UnitX(); break;
    case ViewDirection::NegX: eye = -Vec3::UnitX(); break;
    case ViewDirection::PosY: eye = Vec3::UnitY(); break;
    case ViewDirection::NegY: eye = -Vec3::UnitY(); break;
    case ViewDirection::PosZ: eye = Vec3::UnitZ(); up_hint = Vec3::UnitY(); break;
    case ViewDirection::NegZ: eye = -Vec3::UnitZ(); up_hint = Vec3::UnitY(); break;
    case ViewDirection::Iso: eye = Vec3(1.0, -1.0, 1.0).normalized(); break;
    }
    Camera cam;
    cam.forward = -eye;
    cam.right = cam.forward.cross(up_hint).normalized();
    cam.up = cam.right.cross(cam.forward);
    cam.width = view.width;
    cam.height = view.height;

    double umin = std::numeric_limits<double>::infinity(), umax = -umin, vmin = umin, vmax = -umin;
    for (int m = 0; m < 8; ++m) {
        Vec3 p((m & 1) ? domain.hi.x() : domain.lo.x(), (m & 2) ? domain.hi.y() : domain.lo.y(),
               (m & 4) ? domain.hi.z() : domain.lo.z());
        const double u = p.dot(cam.right), v = p.dot(cam.up);
        umin = std::min(umin, u);
        umax = std::max(umax, u);
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    const double du = std::max(umax - umin, 1e-9), dv = std::max(vmax - vmin, 1e-9);
    cam.scale = std::min(view.width / (1.1 * du), view.height / (1.1 * dv));
    cam.u0 = 0.5 * (umin + umax);
    cam.v0 = 0.5 * (vmin + vmax);
    return cam;
}

double edge(const Vec3& a, const Vec3& b, double x, double y)
{
    return (b.x() - a.x()) * (y - a.y()) - (b.y() - a.y()) * (x - a.x());
}

void rasterize(Image& img, std::vector<double>& depth, const Vec3& a, const Vec3& b, const Vec3& c, Rgb color)
{
    const double area = edge(a, b, c.x(), c.y());
    if (std::abs(area) < 1e-12)
        return;
    const int x0 = std::max(0, int(std::floor(std::min({a.x(), b.x(), c.x()}))));
    const int x1 = std::min(img.width - 1, int(std::ceil(std::max({a.x(), b.x(), c.x()}))));
    const int y0 = std::max(0, int(std::floor(std::min({a.y(), b.y(), c.y()}))));
    const int y1 = std::min(img.height - 1, int(std::ceil(std::max({a.y(), b.y(), c.y()}))));
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            const double w0 = edge(b, c, px, py) / area;
            const double w1 = edge(c, a, px, py) / area;
            const double w2 = edge(a, b, px, py) / area;
            if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0)
                continue;
            const double z = w0 * a.z() + w1 * b.z() + w2 * c.z();
            double& zb = depth[std::size_t(y) * img.width + x];
            if (z < zb) {
                zb = z;
                img.set(x, y, color);
            }
        }
}

void plot(Image& img, long x, long y, Rgb c)
{
    if (x >= 0 && y >= 0 && x < img.width && y < img.height)
        img.set(int(x), int(y), c);
}

void draw_line(Image& img, const Vec3& a, const Vec3& b, Rgb c)
{
    long x0 = std::lround(a.x() - 0.5), y0 = std::lround(a.y() - 0.5);
    const long x1 = std::lround(b.x() - 0.5), y1 = std::lround(b.y() - 0.5);
    const long dx = std::labs(x1 - x0), dy = -std::labs(y1 - y0);
    const long sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    long err = dx + dy;
    while (true) {
        plot(img, x0, y0, c);
        if (x0 == x1 && y0 == y1)
            break;
        const long e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

void draw_box(Image& img, const Camera& cam, const Box& b, Rgb c)
{
    std::array<Vec3, 8> p;
    for (int m = 0; m < 8; ++m)
        p[m] = cam.project(Vec3((m & 1) ? b.hi.x() : b.lo.x(), (m & 2) ? b.hi.y() : b.lo.y(),
                                (m & 4) ? b.hi.z() : b.lo.z()));
    for (int m = 0; m < 8; ++m)
        for (int bit : {1, 2, 4})
            if (!(m & bit))
                draw_line(img, p[m], p[m | bit], c);
    // Point-like selectors would otherwise vanish into a single pixel.
    if (b.extent().maxCoeff() * cam.scale < 2.0) {
        const Vec3 q = cam.project(b.center());
        draw_line(img, q + Vec3(-3, 0, 0), q + Vec3(3, 0, 0), c);
        draw_line(img, q + Vec3(0, -3, 0), q + Vec3(0, 3, 0), c);
    }
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int s = 24; s >= 0; s -= 8)
        out.push_back(std::uint8_t(v >> s));
}

void png_chunk(std::vector<std::uint8_t>& out, const char* type, const std::vector<std::uint8_t>& data)
{
    put_u32(out, std::uint32_t(data.size()));
    const std::size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const uLong crc = crc32(0L, out.data() + start, uInt(out.size() - start));
    put_u32(out, std::uint32_t(crc));
}

} // namespace

std::string to_string(ViewDirection d)
{
    for (const auto& v : kViews)
        if (v.dir == d)
            return v.name;
    return "iso";
}

std::string file_tag(ViewDirection d)
{
    for (const auto& v : kViews)
        if (v.dir == d)
            return v.tag;
    return "iso";
}

ViewDirection view_direction_from_string(const std::string& s)
{
    for (const auto& v : kViews)
        if (s == v.name || s == v.tag)
            return v.dir;
    throw std::invalid_argument("unknown view direction '" + s + "'");
}

std::vector<ViewDirection> default_views()
{
    return {ViewDirection::PosX, ViewDirection::PosY, ViewDirection::PosZ, ViewDirection::Iso};
}

Image render_view(const SurfaceMesh& mesh, const LoadCase& c, const ViewSpec& view)
{
    if (view.width < 64 || view.height < 64)
        throw std::invalid_argument("render size must be at least 64 x 64");
    const Camera cam = make_camera(c.domain, view);
    Image img(view.width, view.height, kBackground);
    std::vector<double> depth(std::size_t(view.width) * view.height, std::numeric_limits<double>::infinity());

    const Vec3 light = (-0.6 * cam.forward + 0.5 * cam.up + 0.35 * cam.right).normalized();
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec3 n = mesh.normal(t);
        if (!n.allFinite())
            continue;
        const double shade = 0.3 + 0.7 * std::abs(n.dot(light));
        const auto level = std::uint8_t(std::lround(200.0 * shade));
        rasterize(img, depth, cam.project(mesh.vertices[tri[0]]), cam.project(mesh.vertices[tri[1]]),
                  cam.project(mesh.vertices[tri[2]]), {level, level, level});
    }

    if (view.draw_domain) {
        draw_box(img, cam, c.domain, kDomainColor);
        for (const auto& k : c.keep_out)
            draw_box(img, cam, k, kDomainColor);
    }
    if (view.draw_selectors) {
        for (const auto& bc : c.boundary_conditions)
            draw_box(img, cam, c.selector(bc.selector_id).query, kSupportColor);
        for (const auto& load : c.loads)
            draw_box(img, cam, c.selector(load.selector_id).query, kLoadColor);
    }
    return img;
}

std::vector<std::uint8_t> encode_ppm(const Image& img)
{
    const std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

Image decode_ppm(std::span<const std::uint8_t> bytes)
{
    std::size_t pos = 0;
    auto fail = [](const char* why) { throw std::invalid_argument(std::string("bad PPM: ") + why); };
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n')
                    ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&] {
        skip_space();
        long v = 0;
        std::size_t start = pos;
        while (pos < bytes.size() && std::isdigit(bytes[pos]))
            v = v * 10 + (bytes[pos++] - '0');
        if (pos == start || v > 1 << 20)
            fail("expected a number");
        return int(v);
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
        fail("missing P6 magic");
    pos = 2;
    const int w = read_int(), h = read_int(), maxval = read_int();
    if (maxval != 255)
        fail("only maxval 255 is supported");
    if (pos >= bytes.size() || !std::isspace(bytes[pos]))
        fail("missing separator after header");
    ++pos;
    const std::size_t n = 3 * std::size_t(w) * std::size_t(h);
    if (bytes.size() - pos != n)
        fail("payload size does not match dimensions");
    Image img;
    img.width = w;
    img.height = h;
    img.pixels.assign(bytes.begin() + std::ptrdiff_t(pos), bytes.end());
    return img;
}

std::vector<std::uint8_t> encode_png(const Image& img)
{
    std::vector<std::uint8_t> raw;
    raw.reserve(std::size_t(img.height) * (1 + 3 * std::size_t(img.width)));
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);
        auto row = img.pixels.begin() + std::ptrdiff_t(3 * std::size_t(y) * img.width);
        raw.insert(raw.end(), row, row + 3 * img.width);
    }
    uLongf zlen = compressBound(uLong(raw.size()));
    std::vector<std::uint8_t> z(zlen);
    if (compress2(z.data(), &zlen, raw.data(), uLong(raw.size()), 9) != Z_OK)
        throw std::runtime_error("zlib compression failed");
    z.resize(zlen);

    std::vector<std::uint8_t> out{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    std::vector<std::uint8_t> ihdr;
    put_u32(ihdr, std::uint32_t(img.width));
    put_u32(ihdr, std::uint32_t(img.height));
    ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0}); // 8-bit RGB, no interlace
    png_chunk(out, "IHDR", ihdr);
    png_chunk(out, "IDAT", z);
    png_chunk(out, "IEND", {});
    return out;
}

} // namespace physcad
