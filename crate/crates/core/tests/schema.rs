use std::sync::Arc;

use serde_json::Value;
use speejis_core::{
    decode_wav, BackendConfig, BaselineBackend, EmojiTable, HttpSerBackend, Pipeline, PipelineConfig, SerBackend,
};
use speejis_testkit::{unreachable_url, wav};

const SCHEMA: &str = include_str!("../../../docs/descriptor.schema.json");

fn pipeline(ser: Arc<dyn SerBackend>) -> Pipeline {
    Pipeline::new(Arc::new(EmojiTable::builtin()), PipelineConfig::default(), ser, None).unwrap()
}

#[tokio::test]
async fn descriptors_conform_to_published_schema() {
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let failing: Arc<dyn SerBackend> = Arc::new(
        HttpSerBackend::new(&BackendConfig {
            retry_count: 0,
            ..BackendConfig::external(unreachable_url())
        })
        .unwrap(),
    );
    let cases = [
        (pipeline(Arc::new(BaselineBackend)), wav::speechish(7.3, 1)),
        (pipeline(Arc::new(BaselineBackend)), wav::silence(0.3)),
        (pipeline(failing), wav::speechish(2.0, 2)),
    ];
    for (p, bytes) in cases {
        let d = p.augment("m", &decode_wav(&bytes).unwrap()).await;
        let v: Value = serde_json::from_str(&d.to_json()).unwrap();
        let errors: Vec<String> = validator
            .iter_errors(&v)
            .map(|e| format!("{} at {}", e, e.instance_path))
            .collect();
        assert!(errors.is_empty(), "{errors:?}");
    }

    let mut v: Value = serde_json::from_str(
        &pipeline(Arc::new(BaselineBackend))
            .augment("m", &decode_wav(&wav::silence(1.0)).unwrap())
            .await
            .to_json(),
    )
    .unwrap();
    v["overall_emoji"] = Value::Null;
    assert!(!validator.is_valid(&v), "done without overall_emoji must be rejected");
}
