#include "ctpurify/tomography.hpp"

namespace ctpurify {

Sinogram radon(const Image& img, const ProjectionGeometry& geom) {
    if (img.size() == 0) throw InvalidArgument("radon: empty image");
    const auto d = radon<double>(img.pixels.cast<double>(), geom);
    Sinogram s;
    s.angles = d.angles;
    s.bin_spacing = d.bin_spacing;
    s.data = d.data.cast<float>();
    return s;
}

Image iradon(const Sinogram& sino, ReconFilter filter, Index out_size) {
    BasicSinogram<double> d;
    d.angles = sino.angles;
    d.bin_spacing = sino.bin_spacing;
    d.data = sino.data.cast<double>();
    Image out(backproject(d, filter, out_size).max(0.0).min(1.0).cast<float>());
    return out;
}

Image iradon(const Sinogram& sino, const ProjectionGeometry& geom, ReconFilter filter, Index out_size) {
    geom.validate();
    if (sino.num_angles() != geom.angle_count() || sino.num_bins() != geom.bins_for(out_size))
        throw DimensionMismatch("iradon: sinogram is " + std::to_string(sino.num_angles()) + "x" +
                                std::to_string(sino.num_bins()) + " but geometry expects " +
                                std::to_string(geom.angle_count()) + "x" + std::to_string(geom.bins_for(out_size)));
    return iradon(sino, filter, out_size);
}

Image simulate_uldct(const Image& ndct, const NoiseModel& model, const ProjectionGeometry& geom) {
    model.validate();
    if (ndct.size() == 0) throw InvalidArgument("simulate_uldct: empty image");
    const Index n = std::max(ndct.width(), ndct.height());
    auto sino = radon<double>(ndct.pixels.cast<double>(), geom);
    sino = inject_noise_scaled(sino, model, field_radius(n));
    const Grid<double> full = backproject(sino, ReconFilter::RamLak, n).max(0.0).min(1.0);

    Image out(full.block((n - ndct.height()) / 2, (n - ndct.width()) / 2, ndct.height(), ndct.width()).cast<float>());
    out.meta["stage"] = "simulated_uldct";
    return out;
}

}  // namespace ctpurify
