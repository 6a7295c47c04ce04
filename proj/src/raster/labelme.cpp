// src/raster/labelme.cpp
#include <json.hpp>

#include "ariadne/raster.hpp"

namespace ariadne {

LabelMeDocument parse_labelme(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text.begin(), json_text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("LabelMe: invalid JSON: ") + e.what(), e.byte);
    }
    if (!doc.is_object() || !doc.contains("shapes") || !doc["shapes"].is_array())
        throw DataError("LabelMe: document has no `shapes` array");

    LabelMeDocument out;
    if (doc.contains("imageWidth") && doc["imageWidth"].is_number_integer())
        out.image_width = doc["imageWidth"].get<int>();
    if (doc.contains("imageHeight") && doc["imageHeight"].is_number_integer())
        out.image_height = doc["imageHeight"].get<int>();

    const auto& shapes = doc["shapes"];
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        const auto& shape = shapes[i];
        const auto where = "LabelMe shape " + std::to_string(i);
        if (!shape.is_object()) throw DataError(where + ": not an object");

        std::string type = "polygon";
        if (shape.contains("shape_type") && !shape["shape_type"].is_null()) {
            if (!shape["shape_type"].is_string()) throw DataError(where + ": shape_type is not a string");
            type = shape["shape_type"].get<std::string>();
        }
        if (type != "polygon") {
            out.warnings.push_back({i, "skipped shape_type \"" + type + "\""});
            continue;
        }

        if (!shape.contains("points") || !shape["points"].is_array())
            throw DataError(where + ": missing `points`");
        PolygonAnnotation poly;
        if (shape.contains("label") && shape["label"].is_string()) poly.label = shape["label"].get<std::string>();
        for (const auto& pt : shape["points"]) {
            if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number())
                throw DataError(where + ": non-numeric coordinate");
            poly.vertices.push_back({pt[0].get<double>(), pt[1].get<double>()});
        }
        out.polygons.push_back(std::move(poly));
    }
    return out;
}

}  // namespace ariadne
