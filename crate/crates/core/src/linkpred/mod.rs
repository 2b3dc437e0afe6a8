//! GraphSAGE link prediction: encoder, decoders, sampling and training.

mod features;
mod loss;
mod nn;
mod sage;
mod sampling;
mod train;

pub use features::{pair_matrix, NodeFeatureTable, NodeScalars, StructuralFeatures, STRUCTURAL_DIM};
pub use loss::{unsupervised_loss, DEFAULT_Q};
pub use nn::{Adam, Linear, Matrix, Mlp, Param};
pub use sage::{Encoder, MeanAdjacency, SageLayer};
pub(crate) use sampling::uniform_pairs;
pub use sampling::{sample_negative_indices, sample_negatives, two_hop_pairs, NegativeMode};
pub use train::{
    bce_with_logits, predict_link, softmax_cross_entropy, train_decoder, train_encoder_unsupervised, train_supervised,
    train_supervised_ctx, train_unsupervised, train_unsupervised_ctx, unsupervised_loss_and_grad, Decoder,
    EncoderHistory, LinkData, LinkModel, SageConfig, SearchSpace, SupervisedNet, TrainContext, TrainMode, TrialRecord,
};
