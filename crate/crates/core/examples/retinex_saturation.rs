//! Saturation plane of a shaded fixture before and after single-scale
//! Retinex. The left-to-right shading is mostly gone afterwards.

use corroscan::colorspace::{extract_saturation, rgb_image_to_hsv};
use corroscan::imaging::FloatPlane;
use corroscan::retinex::{auto_sigma, linear_stretch, ssr, SsrParams, DEFAULT_EPSILON_FLOOR};
use corroscan::synth::station_objects;

fn column_means(plane: &FloatPlane, cols: &[usize]) -> Vec<f64> {
    cols.iter()
        .map(|&x| (0..plane.height()).map(|y| plane.get(x, y)).sum::<f64>() / plane.height() as f64)
        .collect()
}

pub fn run_example() -> corroscan::Result<FloatPlane> {
    let tank = station_objects()
        .into_iter()
        .find(|o| o.fixture.name == "tank_wall")
        .expect("tank_wall is part of the set");
    let image = &tank.fixture.image;
    let sat = extract_saturation(&rgb_image_to_hsv(image));
    let params = SsrParams::new(auto_sigma(image.width(), image.height()), DEFAULT_EPSILON_FLOOR)?;
    let stretched = linear_stretch(&ssr(&sat, &params)?);

    let cols = [8, 128, 256, 384, 504];
    println!("sigma = {:.1}", params.sigma);
    println!("saturation column means: {:.4?}", column_means(&sat, &cols));
    println!("stretched SSR column means: {:.4?}", column_means(&stretched, &cols));
    Ok(stretched)
}

fn main() -> corroscan::Result<()> {
    run_example().map(|_| ())
}
