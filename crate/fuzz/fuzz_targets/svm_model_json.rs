#![no_main]

use libfuzzer_sys::fuzz_target;
use vidspam::svm::SvmModel;

fuzz_target!(|data: &[u8]| {
    let Ok(model) = serde_json::from_slice::<SvmModel>(data) else {
        return;
    };
    if model.validate().is_ok() {
        let _ = model.decision_value(&vec![0.5; model.dim()]);
        let back: SvmModel = serde_json::from_str(&serde_json::to_string(&model).unwrap()).unwrap();
        assert_eq!(back.w, model.w);
    }
});
