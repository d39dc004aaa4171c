namespace tractforge {
}
