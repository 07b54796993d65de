#pragma once

// Downlink transmittance: Gaussian-beam diffraction, slab atmosphere and a
// fixed intrinsic loss. Loss in dB is -10 log10(eta); larger is worse.

#include "ssqr/geometry.hpp"

namespace ssqr::link {

/// How transmitter-aperture truncation of the Gaussian beam is accounted for.
///  - aperture: far-field on-axis factor (1 - exp(-a^2/w0^2))^2 from the
///    truncated-Gaussian Fourier integral, a = D_t/2. Independent of range.
///  - fixed:    a caller-supplied constant in dB.
///  - none:     untruncated Gaussian beam.
enum class ClippingModel { none, aperture, fixed };

struct OpticsParams {
    double wavelength_nm = 780.0;
    double tx_aperture_mm = 100.0;
    double beam_waist_mm = 45.0;
    double rx_aperture_mm = 1000.0;
    double intrinsic_loss_db = 10.0;
    double zenith_transmittance = 0.79;
    ClippingModel clipping = ClippingModel::aperture;
    double fixed_clipping_db = 0.4;

    void validate() const;
};

struct LossBreakdown {
    double diffraction = 1.0;
    double atmosphere = 1.0;
    double intrinsic = 1.0;
    double total = 1.0;

    double diffraction_db() const;
    double atmosphere_db() const;
    double intrinsic_db() const;
    double total_db() const;
};

double to_db(double eta);
double from_db(double loss_db);

/// Multiplicative clipping transmittance for the configured model.
double clipping_eta(const OpticsParams& optics);
/// Fraction of beam power falling outside the transmit aperture, in dB.
double aperture_power_truncation_db(const OpticsParams& optics);

double diffraction_eta(double range_km, const OpticsParams& optics);
/// eta_zen^(1/sin(theta)); throws std::domain_error for theta <= 0.
double atmospheric_eta(double elevation_rad, double zenith_transmittance);
LossBreakdown total_eta(double range_km, double elevation_rad, const OpticsParams& optics);

/// Total loss in dB at zenith (range = altitude, elevation 90 deg).
double system_loss_metric(const OpticsParams& optics, double altitude_km);

/// Returns optics with intrinsic loss shifted so that the system loss metric
/// equals target_db. Throws std::domain_error when the target lies below the
/// diffraction + atmosphere floor (would need negative intrinsic loss).
OpticsParams pin_to_system_loss(const OpticsParams& optics, double altitude_km, double target_db);

/// Fills eta_a/eta_b of a link sample. Stations below the horizon get 0.
geo::LinkSample attach_transmittance(geo::LinkSample sample, const OpticsParams& optics);

}  // namespace ssqr::link
