#include "ssqr/linkbudget.hpp"

#include "ssqr/constants.hpp"

#include <cmath>
#include <stdexcept>

namespace ssqr::link {

void OpticsParams::validate() const {
    if (!(wavelength_nm > 0.0)) throw std::invalid_argument("wavelength_nm must be > 0");
    if (!(tx_aperture_mm > 0.0)) throw std::invalid_argument("tx_aperture_mm must be > 0");
    if (!(beam_waist_mm > 0.0)) throw std::invalid_argument("beam_waist_mm must be > 0");
    if (!(rx_aperture_mm > 0.0)) throw std::invalid_argument("rx_aperture_mm must be > 0");
    if (!std::isfinite(intrinsic_loss_db)) throw std::invalid_argument("intrinsic_loss_db must be finite");
    if (!(zenith_transmittance > 0.0 && zenith_transmittance <= 1.0))
        throw std::invalid_argument("zenith_transmittance must lie in (0, 1]");
    if (clipping == ClippingModel::fixed && !(fixed_clipping_db >= 0.0))
        throw std::invalid_argument("fixed_clipping_db must be >= 0");
}

double to_db(double eta) { return -10.0 * std::log10(eta); }
double from_db(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }

double LossBreakdown::diffraction_db() const { return to_db(diffraction); }
double LossBreakdown::atmosphere_db() const { return to_db(atmosphere); }
double LossBreakdown::intrinsic_db() const { return to_db(intrinsic); }
double LossBreakdown::total_db() const { return to_db(total); }

double aperture_power_truncation_db(const OpticsParams& optics) {
    const double a = 0.5 * optics.tx_aperture_mm;
    const double w = optics.beam_waist_mm;
    return to_db(1.0 - std::exp(-2.0 * a * a / (w * w)));
}

double clipping_eta(const OpticsParams& optics) {
    switch (optics.clipping) {
        case ClippingModel::none:
            return 1.0;
        case ClippingModel::fixed:
            return from_db(optics.fixed_clipping_db);
        case ClippingModel::aperture: {
            const double a = 0.5 * optics.tx_aperture_mm;
            const double w = optics.beam_waist_mm;
            const double amp = 1.0 - std::exp(-a * a / (w * w));
            return amp * amp;
        }
    }
    return 1.0;
}

double diffraction_eta(double range_km, const OpticsParams& optics) {
    if (!(range_km > 0.0)) throw std::domain_error("range must be > 0");
    const double lambda = optics.wavelength_nm * 1e-9;
    const double w0 = optics.beam_waist_mm * 1e-3;
    const double dr = optics.rx_aperture_mm * 1e-3;
    const double l = range_km * 1e3;
    const double z = lambda * l / (kPi * w0 * w0);
    const double wl2 = w0 * w0 * (1.0 + z * z);
    // -expm1 keeps precision when the beam is much wider than the receiver.
    return -std::expm1(-dr * dr / (2.0 * wl2)) * clipping_eta(optics);
}

double atmospheric_eta(double elevation_rad, double zenith_transmittance) {
    if (!(elevation_rad > 0.0)) throw std::domain_error("atmospheric transmittance requested below horizon");
    return std::pow(zenith_transmittance, 1.0 / std::sin(elevation_rad));
}

LossBreakdown total_eta(double range_km, double elevation_rad, const OpticsParams& optics) {
    LossBreakdown b;
    b.diffraction = diffraction_eta(range_km, optics);
    b.atmosphere = atmospheric_eta(elevation_rad, optics.zenith_transmittance);
    b.intrinsic = from_db(optics.intrinsic_loss_db);
    b.total = b.diffraction * b.atmosphere * b.intrinsic;
    return b;
}

double system_loss_metric(const OpticsParams& optics, double altitude_km) {
    if (!(altitude_km > 0.0)) throw std::invalid_argument("altitude_km must be > 0");
    const LossBreakdown b = total_eta(altitude_km, kPi / 2.0, optics);
    return b.diffraction_db() + b.atmosphere_db() + optics.intrinsic_loss_db;
}

OpticsParams pin_to_system_loss(const OpticsParams& optics, double altitude_km, double target_db) {
    const double floor_db = system_loss_metric(optics, altitude_km) - optics.intrinsic_loss_db;
    if (!(target_db >= floor_db))
        throw std::domain_error("system loss target " + std::to_string(target_db) +
                                " dB is below the diffraction+atmosphere floor of " +
                                std::to_string(floor_db) + " dB");
    OpticsParams out = optics;
    out.intrinsic_loss_db = target_db - floor_db;
    return out;
}

geo::LinkSample attach_transmittance(geo::LinkSample s, const OpticsParams& optics) {
    s.eta_a = s.elevation_a_rad > 0.0 ? total_eta(s.range_a_km, s.elevation_a_rad, optics).total : 0.0;
    s.eta_b = s.elevation_b_rad > 0.0 ? total_eta(s.range_b_km, s.elevation_b_rad, optics).total : 0.0;
    return s;
}

}  // namespace ssqr::link
