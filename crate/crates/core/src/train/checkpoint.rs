use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AdamState, EpochRecord, Hyperparameters, TrainError};
use crate::models::GanArchitecture;
use crate::nn::{Archive, ParameterStore};
use crate::tensor::Tensor;

/// Schema version of the checkpoint metadata (independent of the container).
pub const CHECKPOINT_VERSION: u32 = 1;

/// Position of the training RNG stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    /// Hex-encoded 32-byte ChaCha key.
    pub seed: String,
    pub stream: u64,
    /// Word position, as a decimal string (it is a 128-bit counter).
    pub word_pos: String,
}

impl RngState {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        Self {
            seed: hex::encode(rng.get_seed()),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos().to_string(),
        }
    }

    pub fn restore(&self) -> Result<ChaCha8Rng, TrainError> {
        let bad = |m: &str| TrainError::CorruptCheckpoint(format!("rng state: {m}"));
        let bytes = hex::decode(&self.seed).map_err(|_| bad("seed is not hex"))?;
        let seed: [u8; 32] = bytes.try_into().map_err(|_| bad("seed must be 32 bytes"))?;
        let pos: u128 = self.word_pos.parse().map_err(|_| bad("word position"))?;
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(pos);
        Ok(rng)
    }
}

/// Complete resumable state of a run at the end of `epoch`.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub run_id: String,
    pub hyper: Hyperparameters,
    pub seed: u64,
    pub dataset_ref: String,
    pub architecture: GanArchitecture,
    pub epoch: usize,
    pub rng: RngState,
    pub generator: ParameterStore,
    pub discriminator: ParameterStore,
    pub g_adam: AdamState,
    pub d_adam: AdamState,
    pub records: Vec<EpochRecord>,
    pub generator_updates: usize,
    pub critic_updates: usize,
}

#[derive(Serialize, Deserialize)]
struct Meta {
    checkpoint_version: u32,
    run_id: String,
    hyper: Hyperparameters,
    seed: u64,
    dataset_ref: String,
    architecture: GanArchitecture,
    epoch: usize,
    rng: RngState,
    generator_init_seed: Option<u64>,
    discriminator_init_seed: Option<u64>,
    g_adam_step: u64,
    d_adam_step: u64,
    records: Vec<EpochRecord>,
    generator_updates: usize,
    critic_updates: usize,
}

fn put(archive: &mut Archive, prefix: &str, map: &BTreeMap<String, Tensor>) {
    for (name, t) in map {
        archive
            .tensors
            .insert(format!("{prefix}/{name}"), t.clone());
    }
}

fn take(tensors: &BTreeMap<String, Tensor>, prefix: &str) -> BTreeMap<String, Tensor> {
    let prefix = format!("{prefix}/");
    tensors
        .iter()
        .filter_map(|(k, t)| k.strip_prefix(&prefix).map(|n| (n.to_string(), t.clone())))
        .collect()
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: &Path) -> Result<(), TrainError> {
    let meta = Meta {
        checkpoint_version: CHECKPOINT_VERSION,
        run_id: ckpt.run_id.clone(),
        hyper: ckpt.hyper.clone(),
        seed: ckpt.seed,
        dataset_ref: ckpt.dataset_ref.clone(),
        architecture: ckpt.architecture.clone(),
        epoch: ckpt.epoch,
        rng: ckpt.rng.clone(),
        generator_init_seed: ckpt.generator.init_seed(),
        discriminator_init_seed: ckpt.discriminator.init_seed(),
        g_adam_step: ckpt.g_adam.step,
        d_adam_step: ckpt.d_adam.step,
        records: ckpt.records.clone(),
        generator_updates: ckpt.generator_updates,
        critic_updates: ckpt.critic_updates,
    };
    let mut archive = Archive::new(
        serde_json::to_value(meta).map_err(|e| TrainError::CorruptCheckpoint(e.to_string()))?,
    );
    put(&mut archive, "generator/param", ckpt.generator.tensors());
    put(&mut archive, "generator/buffer", ckpt.generator.buffers());
    put(
        &mut archive,
        "discriminator/param",
        ckpt.discriminator.tensors(),
    );
    put(
        &mut archive,
        "discriminator/buffer",
        ckpt.discriminator.buffers(),
    );
    put(&mut archive, "g_adam/m", &ckpt.g_adam.m);
    put(&mut archive, "g_adam/v", &ckpt.g_adam.v);
    put(&mut archive, "d_adam/m", &ckpt.d_adam.m);
    put(&mut archive, "d_adam/v", &ckpt.d_adam.v);
    archive.save(path)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, TrainError> {
    let archive = Archive::load(path)?;
    let version = archive
        .meta
        .get("checkpoint_version")
        .and_then(|v| v.as_u64());
    match version {
        Some(v) if v == CHECKPOINT_VERSION as u64 => {}
        Some(v) => {
            return Err(TrainError::VersionMismatch {
                found: v as u32,
                expected: CHECKPOINT_VERSION,
            })
        }
        None => {
            return Err(TrainError::CorruptCheckpoint(
                "missing checkpoint_version".into(),
            ))
        }
    }
    let meta: Meta = serde_json::from_value(archive.meta)
        .map_err(|e| TrainError::CorruptCheckpoint(e.to_string()))?;
    let t = &archive.tensors;
    let generator = ParameterStore::from_parts(
        take(t, "generator/param"),
        take(t, "generator/buffer"),
        meta.generator_init_seed,
    );
    let discriminator = ParameterStore::from_parts(
        take(t, "discriminator/param"),
        take(t, "discriminator/buffer"),
        meta.discriminator_init_seed,
    );
    generator.check_against(&meta.architecture.generator)?;
    discriminator.check_against(&meta.architecture.discriminator)?;
    Ok(Checkpoint {
        run_id: meta.run_id,
        hyper: meta.hyper,
        seed: meta.seed,
        dataset_ref: meta.dataset_ref,
        architecture: meta.architecture,
        epoch: meta.epoch,
        rng: meta.rng,
        generator,
        discriminator,
        g_adam: AdamState {
            step: meta.g_adam_step,
            m: take(t, "g_adam/m"),
            v: take(t, "g_adam/v"),
        },
        d_adam: AdamState {
            step: meta.d_adam_step,
            m: take(t, "d_adam/m"),
            v: take(t, "d_adam/v"),
        },
        records: meta.records,
        generator_updates: meta.generator_updates,
        critic_updates: meta.critic_updates,
    })
}
