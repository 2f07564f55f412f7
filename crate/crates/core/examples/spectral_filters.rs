//! Bath rates seen through the available spectral densities.

use qheat::baths::{kms_rate, BathLabel, BathSpec, LorentzianFilter, SkewFilter, SpectralDensity, Window};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kappa = 0.001;
    let densities = [
        ("ohmic", SpectralDensity::ohmic(kappa)),
        ("lorentzian", SpectralDensity::Lorentzian(LorentzianFilter { eta: 1.0, center: 1.0, kappa: 0.05 })),
        (
            "skew",
            SpectralDensity::Skew(SkewFilter {
                eta: 0.05,
                center: 1.0,
                underlying: Box::new(SpectralDensity::flat(kappa)),
                cutoff_low: 0.0,
                cutoff_high: f64::INFINITY,
                lamb_shift: false,
            }),
        ),
        ("masked", SpectralDensity::ohmic(kappa).masked(vec![Window::around(1.0, 0.05)])?),
    ];
    let freqs = [0.5, 0.9, 1.0, 1.1, 1.5];
    print!("{:<11}", "omega");
    for w in freqs {
        print!(" {w:>11}");
    }
    println!();
    for (name, d) in densities {
        let b = BathSpec::new(BathLabel::L, 0.5, d)?;
        print!("{name:<11}");
        for w in freqs {
            print!(" {:>11.4e}", kms_rate(&b, w)?);
        }
        println!();
    }
    Ok(())
}
