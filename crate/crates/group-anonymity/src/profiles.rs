//! Bundled demonstration profiles.
//!
//! Three worked scenarios over the 2000 U.S. Census 5% PUMS extract for
//! Florida: active-duty military counts per place-of-work PUMA, the same
//! group as a share of employed people, and the gap between young-adult male
//! and female population shares. Each profile carries the input signals,
//! hand-picked replacement coefficients, and the expected outputs, so the
//! full pipelines can be exercised without the original census extract.
//!
//! Denominator totals for the share-based profiles are reconstructed from the
//! published per-region ratios (the raw extract is external and large);
//! they are consistent with the published intermediate products.

use crate::masking::Side;

/// Place-of-work PUMA codes for Florida: every 10th value in 12010..=12180.
pub fn parameter_labels() -> Vec<String> {
    (0..18).map(|i| (12010 + 10 * i).to_string()).collect()
}

/// Inputs and expected outputs of the quantity-masking scenario.
pub struct QuantityProfile {
    pub quantities: Vec<f64>,
    pub new_coeffs: Vec<f64>,
    pub offset: f64,
    pub expected_coeffs: Vec<f64>,
    pub expected_approx: Vec<f64>,
    pub expected_detail: Vec<f64>,
    pub expected_new_approx: Vec<f64>,
    pub expected_raw: Vec<f64>,
    pub expected_scale: f64,
    pub expected_final: Vec<i64>,
}

pub fn quantity() -> QuantityProfile {
    QuantityProfile {
        quantities: vec![
            669.0, 794.0, 9.0, 11.0, 852.0, 9.0, 4.0, 280.0, 31.0, 118.0, 6.0, 13.0, 1.0, 24.0,
            7.0, 14.0, 18.0, 135.0,
        ],
        new_coeffs: vec![
            334.3871, 390.1183, -445.8494, 55.7312, 167.1935, 445.8494, 501.5806, 390.1183,
            278.6559,
        ],
        offset: -800.0,
        expected_coeffs: vec![
            1034.4972, 14.1421, 608.8189, 200.8183, 105.3589, 13.4350, 17.6777, 14.8492, 108.1873,
        ],
        expected_approx: vec![
            731.5, 731.5, 10.0, 10.0, 430.5, 430.5, 142.0, 142.0, 74.5, 74.5, 9.5, 9.5, 12.5, 12.5,
            10.5, 10.5, 76.5, 76.5,
        ],
        expected_detail: vec![
            -62.5, 62.5, -1.0, 1.0, 421.5, -421.5, -138.0, 138.0, -43.5, 43.5, -3.5, 3.5, -11.5,
            11.5, -3.5, 3.5, -58.5, 58.5,
        ],
        expected_new_approx: vec![
            236.4474, 236.4474, 275.8553, 275.8553, -315.2632, -315.2632, 39.4079, 39.4079,
            118.2237, 118.2237, 315.2632, 315.2632, 354.6711, 354.6711, 275.8553, 275.8553,
            197.0395, 197.0395,
        ],
        expected_raw: vec![
            173.9474, 298.9474, 274.8553, 276.8553, 106.2368, -736.7632, -98.5921, 177.4079,
            74.7237, 161.7237, 311.7632, 318.7632, 343.1711, 366.1711, 272.3553, 279.3553,
            138.5395, 255.5395,
        ],
        expected_scale: 0.1722,
        expected_final: vec![
            168, 189, 185, 185, 156, 11, 121, 168, 151, 166, 191, 193, 197, 201, 185, 186, 162, 182,
        ],
    }
}

/// Inputs and expected outputs of the concentration-masking scenario.
pub struct ConcentrationProfile {
    pub quantities: Vec<f64>,
    /// Employed people per region, reconstructed from the published ratios.
    pub totals: Vec<f64>,
    /// Published per-region shares (4 decimal places).
    pub published_concentrations: Vec<f64>,
    pub new_coeffs: Vec<f64>,
    pub offset: f64,
    pub expected_final: Vec<i64>,
}

pub fn concentration() -> ConcentrationProfile {
    ConcentrationProfile {
        quantities: quantity().quantities,
        totals: vec![
            8375.0, 10760.0, 9683.0, 10860.0, 25755.0, 10154.0, 6916.0, 50685.0, 39891.0, 10453.0,
            9392.0, 9016.0, 8785.0, 11523.0, 11158.0, 24121.0, 30663.0, 46176.0,
        ],
        published_concentrations: vec![
            0.0799, 0.0738, 0.0009, 0.0010, 0.0331, 0.0009, 0.0006, 0.0055, 0.0008, 0.0113, 0.0006,
            0.0014, 0.0001, 0.0021, 0.0006, 0.0006, 0.0006, 0.0029,
        ],
        new_coeffs: vec![
            0.0268, 0.0268, -0.0307, 0.0038, 0.0115, 0.0383, 0.0268, 0.0307, 0.0192,
        ],
        offset: -0.5,
        expected_final: vec![
            77, 97, 88, 99, 223, 82, 61, 449, 352, 94, 87, 83, 80, 105, 102, 221, 276, 417,
        ],
    }
}

/// Inputs and expected outputs of the concentration-difference scenario:
/// young-adult (18-25) males as the main group, females as the subordinate.
pub struct DifferenceProfile {
    pub main_quantities: Vec<f64>,
    pub subordinate_quantities: Vec<f64>,
    /// Population per region, reconstructed from the published male shares.
    pub totals: Vec<f64>,
    pub new_coeffs: Vec<f64>,
    /// Which side absorbed the change at each index in the published solution.
    pub solve_sides: Vec<Side>,
    /// Published solved concentration pair (4 decimal places).
    pub published_main_conc: Vec<f64>,
    pub published_sub_conc: Vec<f64>,
    pub expected_main_scale: f64,
    pub expected_sub_scale: f64,
    pub expected_main_final: Vec<i64>,
    pub expected_sub_final: Vec<i64>,
}

pub fn difference() -> DifferenceProfile {
    let mut sides = vec![Side::Main; 18];
    for i in [1, 12, 13] {
        sides[i] = Side::Subordinate;
    }
    DifferenceProfile {
        main_quantities: vec![
            885.0, 931.0, 863.0, 996.0, 2014.0, 683.0, 435.0, 3212.0, 3037.0, 584.0, 712.0, 607.0,
            690.0, 678.0, 689.0, 1458.0, 1865.0, 2947.0,
        ],
        subordinate_quantities: vec![
            591.0, 713.0, 876.0, 982.0, 1798.0, 629.0, 373.0, 3110.0, 2725.0, 579.0, 584.0, 452.0,
            438.0, 580.0, 578.0, 1246.0, 1806.0, 2821.0,
        ],
        totals: vec![
            8373.0, 10763.0, 9686.0, 10862.0, 25754.0, 10149.0, 6916.0, 50662.0, 39908.0, 10447.0,
            9393.0, 9019.0, 8779.0, 11531.0, 11167.0, 24139.0, 30674.0, 46191.0,
        ],
        new_coeffs: vec![
            0.0, 0.0212, 0.0141, 0.0141, 0.0141, 0.0212, -0.0212, 0.0282, 0.0353,
        ],
        solve_sides: sides,
        published_main_conc: vec![
            0.0780, 0.0865, 0.1041, 0.1067, 0.0813, 0.0704, 0.0674, 0.0679, 0.0820, 0.0617, 0.0754,
            0.0669, 0.0786, 0.0588, 0.0723, 0.0710, 0.0834, 0.0865,
        ],
        published_sub_conc: vec![
            0.0706, 0.0940, 0.0905, 0.0904, 0.0698, 0.0620, 0.0539, 0.0614, 0.0683, 0.0554, 0.0622,
            0.0501, 0.0834, 0.0839, 0.0518, 0.0516, 0.0589, 0.0611,
        ],
        expected_main_scale: 0.8911,
        expected_sub_scale: 0.9552,
        expected_main_final: vec![
            582, 830, 898, 1033, 1866, 637, 415, 3065, 2914, 575, 631, 537, 615, 604, 719, 1527,
            2280, 3557,
        ],
        expected_sub_final: vec![
            565, 966, 837, 938, 1717, 601, 356, 2971, 2603, 553, 558, 432, 700, 924, 552, 1190,
            1725, 2695,
        ],
    }
}
