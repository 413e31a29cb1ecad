use birkhoff_core::sympl::SymplecticPath;
use birkhoff_core::sympl::index::rs_index;
use std::f64::consts::TAU;

fn main() {
    let loop1 = SymplecticPath::rotation(2, TAU, 1.0, 1024).unwrap();
    let shear = SymplecticPath::shear(1.0, 1.0, 256).unwrap();
    let cat = loop1.catenate(&shear).unwrap();
    match rs_index(&cat) {
        Ok(est) => println!("value = {} regularized = {}", est.value, est.resolution.regularized),
        Err(e) => println!("err: {e}"),
    }
}
