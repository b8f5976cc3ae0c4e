#![allow(dead_code)]

use std::sync::OnceLock;

use dwmix::model::{Model, ModelSpec};

pub fn default_model() -> &'static Model {
    static MODEL: OnceLock<Model> = OnceLock::new();
    MODEL.get_or_init(|| Model::build(&ModelSpec::default()).expect("default model builds"))
}
