#include "mechsearch/scene_io.hpp"

#include <png.h>

#include <cstdio>
#include <fstream>
#include <memory>

#include "mechsearch/errors.hpp"

namespace mechsearch {

using nlohmann::json;

json scene_to_json(const SceneState& scene) {
    json objects = json::array();
    for (const ObjectState& o : scene.objects) {
        json verts = json::array();
        for (const Vec2& v : o.shape.vertices()) verts.push_back({v.x, v.y});
        objects.push_back({
            {"id", o.id},
            {"layer", o.layer},
            {"ejected", o.ejected},
            {"extracted", o.extracted},
            {"pose", {{"x", o.pose.x}, {"y", o.pose.y}, {"theta", o.pose.theta}}},
            {"shape", {{"class", std::string(to_string(o.shape.shape_class()))}, {"height", o.shape.height()}, {"vertices", verts}}},
        });
    }
    return {
        {"schema", kSceneSchema},
        {"bin", {{"width", scene.bin.width}, {"depth", scene.bin.depth}, {"wall", scene.bin.wall}}},
        {"target_id", scene.target_id},
        {"timestep", scene.timestep},
        {"initial_count", scene.initial_count},
        {"objects", objects},
    };
}

SceneState scene_from_json(const json& j) {
    try {
        if (!j.is_object()) throw Error(ErrorCode::BadSnapshot, "snapshot must be a JSON object");
        if (j.value("schema", std::string{}) != kSceneSchema) {
            throw Error(ErrorCode::BadSnapshot, "unsupported schema '" + j.value("schema", std::string{}) + "'");
        }
        SceneState s;
        const json& b = j.at("bin");
        s.bin = {b.at("width").get<double>(), b.at("depth").get<double>(), b.at("wall").get<double>()};
        s.target_id = j.at("target_id").get<int>();
        s.timestep = j.at("timestep").get<int>();
        s.initial_count = j.at("initial_count").get<int>();
        for (const json& o : j.at("objects")) {
            const json& sh = o.at("shape");
            Polygon verts;
            for (const json& v : sh.at("vertices")) verts.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
            ObjectShape shape(std::move(verts), sh.at("height").get<double>(),
                              shape_class_from_string(sh.at("class").get<std::string>()));
            const json& p = o.at("pose");
            s.objects.push_back(ObjectState{
                o.at("id").get<int>(),
                std::move(shape),
                {p.at("x").get<double>(), p.at("y").get<double>(), p.at("theta").get<double>()},
                o.at("layer").get<int>(),
                o.value("ejected", false),
                o.value("extracted", false),
            });
        }
        s.validate();
        return s;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::BadSnapshot) throw;
        throw Error(ErrorCode::BadSnapshot, e.what());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadSnapshot, e.what());
    }
}

void save_scene(const SceneState& scene, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    f << scene_to_json(scene).dump(2) << '\n';
    if (!f) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

SceneState load_scene(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadSnapshot, path.string() + ": " + e.what());
    }
    return scene_from_json(j);
}

namespace {

// libpng reports errors through longjmp, so this frame holds no objects with
// destructors. Returns false when libpng gave up.
bool write_packed_png(FILE* fp, int rows, int cols, const png_byte* packed, std::size_t stride) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(cols), static_cast<png_uint_32>(rows), 1, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < rows; ++r) png_write_row(png, packed + static_cast<std::size_t>(r) * stride);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

}  // namespace

void write_mask_png(const MaskImage& mask, const std::filesystem::path& path) {
    const std::size_t stride = static_cast<std::size_t>((mask.cols + 7) / 8);
    std::vector<png_byte> packed(stride * static_cast<std::size_t>(mask.rows), 0);
    for (int r = 0; r < mask.rows; ++r) {
        for (int c = 0; c < mask.cols; ++c) {
            if (mask.at(r, c)) packed[static_cast<std::size_t>(r) * stride + static_cast<std::size_t>(c / 8)] |= static_cast<png_byte>(0x80 >> (c % 8));
        }
    }
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
    if (!fp) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    if (!write_packed_png(fp.get(), mask.rows, mask.cols, packed.data(), stride)) {
        throw Error(ErrorCode::IoError, "libpng failed writing " + path.string());
    }
}

void dump_masks(const SegMasks& masks, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string());
    write_mask_png(masks.occupancy, dir / "occupancy.png");
    for (const MaskEntry& e : masks.entries) {
        const std::string stem = "object_" + std::to_string(e.object_id);
        write_mask_png(e.modal, dir / (stem + "_modal.png"));
        write_mask_png(e.amodal, dir / (stem + "_amodal.png"));
    }
}

}  // namespace mechsearch
